#include "editforge/util/rng.hpp"

#include <numeric>

#include "editforge/error.hpp"
#include "editforge/util/hash.hpp"

namespace editforge {

Rng Rng::derive(std::uint64_t seed, std::string_view label) {
    return Rng(mix64(seed ^ mix64(fnv1a64(label))));
}

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw ContractViolation("Rng::below: n must be positive");
    const std::uint64_t bound = n;
    // Reject the partial top bucket so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                (std::numeric_limits<std::uint64_t>::max() % bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
    if (k > n) throw ContractViolation("Rng::sample_indices: k > n");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + below(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace editforge

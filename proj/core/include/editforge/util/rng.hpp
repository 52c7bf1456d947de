#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace editforge {

/// Seeded randomness with platform-independent derived operations.
///
/// std::mt19937_64's output sequence is fixed by the standard, but the
/// distributions in <random> are not, so bounded draws and shuffles are
/// implemented here to keep runs byte-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for a named sub-task, e.g. derive(seed, "round:3").
    static Rng derive(std::uint64_t seed, std::string_view label);

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n);

    /// Uniform double in [0, 1).
    double uniform();

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

    /// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

}  // namespace editforge

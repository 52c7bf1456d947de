#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace editforge {

inline constexpr std::size_t kShingleWidth = 5;
inline constexpr std::size_t kDefaultNumPerm = 128;

/// A character shingle packed losslessly into 64 bits: the low 40 bits hold
/// up to five bytes and bits 40..47 hold the byte length, so shingles of
/// different lengths never collide and set operations on packed values are
/// exact set operations on the underlying strings.
using Shingle = std::uint64_t;

/// Strips trailing whitespace from every line; line structure is kept.
std::string normalize_code(std::string_view code);

/// Sorted, unique character 5-gram shingles of the normalized code. Text
/// shorter than the shingle width becomes one shingle of the whole text.
std::vector<Shingle> shingle_set(std::string_view code);

/// |A ∩ B| / |A ∪ B| over sorted unique sets; 1.0 when both are empty.
double exact_jaccard(std::span<const Shingle> a, std::span<const Shingle> b);

using Signature = std::vector<std::uint64_t>;

/// MinHash over universal hashes h_i(x) = (a_i·x + b_i) mod (2^61 - 1), with
/// (a_i, b_i) drawn from a seeded generator.
class MinHasher {
public:
    MinHasher(std::size_t num_perm, std::uint64_t seed);

    Signature sign(std::span<const Shingle> shingles) const;

    std::size_t num_perm() const { return a_.size(); }
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> a_;
    std::vector<std::uint64_t> b_;
};

/// Fraction of positions where two equal-length signatures agree.
double estimate_jaccard(const Signature& a, const Signature& b);

/// Signature agreement of two code texts under a fresh MinHasher.
/// Requires num_perm >= 16.
double minhash_estimate(std::string_view code_a, std::string_view code_b,
                        std::size_t num_perm = kDefaultNumPerm, std::uint64_t seed = 1);

struct LshParams {
    std::size_t bands = 0;
    std::size_t rows = 0;

    friend bool operator==(const LshParams&, const LshParams&) = default;
};

/// Band/row split with bands·rows = num_perm minimising the weighted
/// false-positive and false-negative areas of the S-curve 1-(1-s^r)^b
/// around `threshold`.
LshParams optimal_lsh_params(double threshold, std::size_t num_perm,
                             double false_positive_weight = 0.5,
                             double false_negative_weight = 0.5);

/// Probability that a pair with Jaccard s shares at least one band bucket.
double lsh_collision_probability(double s, LshParams params);

/// Banded MinHash index over dense member slots (0, 1, 2, ...).
class LshIndex {
public:
    LshIndex(LshParams params, std::size_t num_perm);

    void insert(std::uint32_t slot, const Signature& sig);

    /// Slots sharing at least one band bucket with `sig`, ascending, unique.
    std::vector<std::uint32_t> candidates(const Signature& sig) const;

    LshParams params() const { return params_; }
    std::size_t size() const { return size_; }

private:
    std::uint64_t band_key(const Signature& sig, std::size_t band) const;

    LshParams params_;
    std::size_t size_ = 0;
    std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> buckets_;
};

struct CodeIndexConfig {
    std::size_t num_perm = kDefaultNumPerm;
    double threshold = 0.75;
    std::uint64_t seed = 1;
};

struct CodeMatch {
    bool duplicate = false;
    std::optional<std::string> id;
    double jaccard = 0.0;
    std::size_t candidates_checked = 0;
};

/// Near-duplicate detector for code: LSH candidate retrieval followed by
/// exact Jaccard confirmation over stored shingle sets.
///
/// Not internally synchronised. Concurrent check() calls are safe; insert()
/// must be serialised with every other call.
class CodeIndex {
public:
    explicit CodeIndex(CodeIndexConfig config = {});

    /// duplicate is true iff some LSH candidate has exact Jaccard strictly
    /// greater than the threshold; the best such candidate is reported.
    CodeMatch check(std::string_view code) const;

    void insert(std::string id, std::string_view code);

    bool contains(const std::string& id) const { return slot_of_.count(id) != 0; }
    std::size_t size() const { return ids_.size(); }
    const CodeIndexConfig& config() const { return config_; }
    LshParams lsh_params() const { return lsh_.params(); }

    /// Versioned little-endian binary snapshot.
    void save(const std::filesystem::path& path) const;
    static CodeIndex load(const std::filesystem::path& path);

private:
    void insert_prepared(std::string id, std::vector<Shingle> shingles, Signature sig);

    CodeIndexConfig config_;
    MinHasher hasher_;
    LshIndex lsh_;
    std::vector<std::string> ids_;
    std::vector<std::vector<Shingle>> shingles_;
    std::vector<Signature> signatures_;
    std::unordered_map<std::string, std::uint32_t> slot_of_;
};

}  // namespace editforge

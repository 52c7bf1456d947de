#include "editforge/minhash.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "editforge/error.hpp"
#include "editforge/util/hash.hpp"
#include "editforge/util/rng.hpp"
#include "editforge/util/text.hpp"

namespace editforge {
namespace {

__extension__ using uint128 = unsigned __int128;

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t mod_mersenne61(uint128 v) {
    std::uint64_t lo = static_cast<std::uint64_t>(v & kMersenne61);
    std::uint64_t hi = static_cast<std::uint64_t>(v >> 61);
    std::uint64_t r = lo + hi;  // < 2^62 for v < 2^122
    r = (r & kMersenne61) + (r >> 61);
    return r >= kMersenne61 ? r - kMersenne61 : r;
}

Shingle pack(std::string_view bytes) {
    Shingle s = static_cast<Shingle>(bytes.size()) << 40;
    for (std::size_t i = 0; i < bytes.size(); ++i)
        s |= static_cast<Shingle>(static_cast<unsigned char>(bytes[i])) << (8 * i);
    return s;
}

// Simpson's rule; the S-curve is smooth on [0, 1].
template <class F>
double integrate(F f, double lo, double hi, int intervals = 2000) {
    if (hi <= lo) return 0.0;
    const double h = (hi - lo) / intervals;
    double sum = f(lo) + f(hi);
    for (int i = 1; i < intervals; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

constexpr char kSnapshotMagic[8] = {'E', 'F', 'C', 'O', 'D', 'E', 'I', 'X'};
constexpr std::uint32_t kSnapshotVersion = 1;

class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}
    void u64(std::uint64_t v) {
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        out_.write(buf, 8);
    }
    void u32(std::uint32_t v) {
        char buf[4];
        for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        out_.write(buf, 4);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::string_view s) {
        u64(s.size());
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

private:
    std::ostream& out_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& in) : in_(in) {}
    std::uint64_t u64() {
        unsigned char buf[8];
        read(buf, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return v;
    }
    std::uint32_t u32() {
        unsigned char buf[4];
        read(buf, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string bytes() {
        std::uint64_t n = u64();
        if (n > (std::uint64_t{1} << 32)) throw Error(ErrorCategory::data, "index snapshot: corrupt length");
        std::string s(n, '\0');
        read(s.data(), n);
        return s;
    }
    void read(void* dst, std::size_t n) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw Error(ErrorCategory::data, "index snapshot: truncated");
    }

private:
    std::istream& in_;
};

}  // namespace

std::string normalize_code(std::string_view code) {
    std::string out;
    out.reserve(code.size());
    std::size_t start = 0;
    while (start <= code.size()) {
        std::size_t nl = code.find('\n', start);
        std::string_view line =
            code.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.remove_suffix(1);
        out.append(line);
        if (nl == std::string_view::npos) break;
        out.push_back('\n');
        start = nl + 1;
    }
    return out;
}

std::vector<Shingle> shingle_set(std::string_view code) {
    const std::string norm = normalize_code(code);
    std::vector<Shingle> shingles;
    if (norm.size() < kShingleWidth) {
        shingles.push_back(pack(norm));
        return shingles;
    }
    shingles.reserve(norm.size() - kShingleWidth + 1);
    for (std::size_t i = 0; i + kShingleWidth <= norm.size(); ++i)
        shingles.push_back(pack(std::string_view(norm).substr(i, kShingleWidth)));
    std::sort(shingles.begin(), shingles.end());
    shingles.erase(std::unique(shingles.begin(), shingles.end()), shingles.end());
    return shingles;
}

double exact_jaccard(std::span<const Shingle> a, std::span<const Shingle> b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t i = 0, j = 0, common = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++common;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    const std::size_t uni = a.size() + b.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
}

MinHasher::MinHasher(std::size_t num_perm, std::uint64_t seed) : seed_(seed) {
    if (num_perm == 0) throw ContractViolation("MinHasher: num_perm must be positive");
    Rng rng = Rng::derive(seed, "minhash-permutations");
    a_.reserve(num_perm);
    b_.reserve(num_perm);
    for (std::size_t i = 0; i < num_perm; ++i) {
        a_.push_back(1 + rng.below(kMersenne61 - 1));
        b_.push_back(rng.below(kMersenne61));
    }
}

Signature MinHasher::sign(std::span<const Shingle> shingles) const {
    Signature sig(a_.size(), std::numeric_limits<std::uint64_t>::max());
    for (Shingle s : shingles) {
        const std::uint64_t x = mod_mersenne61(mix64(s));
        for (std::size_t i = 0; i < a_.size(); ++i) {
            const std::uint64_t h =
                mod_mersenne61(static_cast<uint128>(a_[i]) * x + b_[i]);
            if (h < sig[i]) sig[i] = h;
        }
    }
    return sig;
}

double estimate_jaccard(const Signature& a, const Signature& b) {
    if (a.size() != b.size() || a.empty())
        throw ContractViolation("estimate_jaccard: signatures must have equal nonzero length");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) agree += (a[i] == b[i]);
    return static_cast<double>(agree) / static_cast<double>(a.size());
}

double minhash_estimate(std::string_view code_a, std::string_view code_b, std::size_t num_perm,
                        std::uint64_t seed) {
    if (num_perm < 16) throw ContractViolation("minhash_estimate: num_perm must be >= 16");
    MinHasher hasher(num_perm, seed);
    const auto sa = shingle_set(code_a);
    const auto sb = shingle_set(code_b);
    return estimate_jaccard(hasher.sign(sa), hasher.sign(sb));
}

double lsh_collision_probability(double s, LshParams params) {
    return 1.0 - std::pow(1.0 - std::pow(s, static_cast<double>(params.rows)),
                          static_cast<double>(params.bands));
}

LshParams optimal_lsh_params(double threshold, std::size_t num_perm, double false_positive_weight,
                             double false_negative_weight) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ContractViolation("optimal_lsh_params: threshold must lie in (0, 1)");
    if (num_perm == 0) throw ContractViolation("optimal_lsh_params: num_perm must be positive");
    LshParams best{};
    double best_error = std::numeric_limits<double>::infinity();
    for (std::size_t bands = 1; bands <= num_perm; ++bands) {
        if (num_perm % bands != 0) continue;
        const LshParams p{bands, num_perm / bands};
        const double fp = integrate([&](double s) { return lsh_collision_probability(s, p); }, 0.0,
                                    threshold);
        const double fn = integrate(
            [&](double s) { return 1.0 - lsh_collision_probability(s, p); }, threshold, 1.0);
        const double error = false_positive_weight * fp + false_negative_weight * fn;
        if (error < best_error) {
            best_error = error;
            best = p;
        }
    }
    return best;
}

LshIndex::LshIndex(LshParams params, std::size_t num_perm) : params_(params) {
    if (params.bands == 0 || params.rows == 0 || params.bands * params.rows != num_perm)
        throw ContractViolation("LshIndex: bands * rows must equal num_perm");
    buckets_.resize(params.bands);
}

std::uint64_t LshIndex::band_key(const Signature& sig, std::size_t band) const {
    std::uint64_t h = mix64(band + 1);
    for (std::size_t r = 0; r < params_.rows; ++r) h = mix64(h ^ sig[band * params_.rows + r]);
    return h;
}

void LshIndex::insert(std::uint32_t slot, const Signature& sig) {
    if (sig.size() != params_.bands * params_.rows)
        throw ContractViolation("LshIndex::insert: signature length mismatch");
    for (std::size_t band = 0; band < params_.bands; ++band)
        buckets_[band][band_key(sig, band)].push_back(slot);
    ++size_;
}

std::vector<std::uint32_t> LshIndex::candidates(const Signature& sig) const {
    if (sig.size() != params_.bands * params_.rows)
        throw ContractViolation("LshIndex::candidates: signature length mismatch");
    std::vector<std::uint32_t> out;
    for (std::size_t band = 0; band < params_.bands; ++band) {
        auto it = buckets_[band].find(band_key(sig, band));
        if (it != buckets_[band].end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CodeIndex::CodeIndex(CodeIndexConfig config)
    : config_(config),
      hasher_(config.num_perm, config.seed),
      lsh_(optimal_lsh_params(config.threshold, config.num_perm), config.num_perm) {}

CodeMatch CodeIndex::check(std::string_view code) const {
    const auto shingles = shingle_set(code);
    const auto sig = hasher_.sign(shingles);
    CodeMatch match;
    for (std::uint32_t slot : lsh_.candidates(sig)) {
        ++match.candidates_checked;
        const double j = exact_jaccard(shingles, shingles_[slot]);
        if (j > config_.threshold && (!match.duplicate || j > match.jaccard)) {
            match.duplicate = true;
            match.id = ids_[slot];
            match.jaccard = j;
        }
    }
    return match;
}

void CodeIndex::insert(std::string id, std::string_view code) {
    auto shingles = shingle_set(code);
    auto sig = hasher_.sign(shingles);
    insert_prepared(std::move(id), std::move(shingles), std::move(sig));
}

void CodeIndex::insert_prepared(std::string id, std::vector<Shingle> shingles, Signature sig) {
    if (slot_of_.count(id)) throw Error(ErrorCategory::conflict, "CodeIndex: duplicate id " + id);
    const auto slot = static_cast<std::uint32_t>(ids_.size());
    lsh_.insert(slot, sig);
    slot_of_.emplace(id, slot);
    ids_.push_back(std::move(id));
    shingles_.push_back(std::move(shingles));
    signatures_.push_back(std::move(sig));
}

void CodeIndex::save(const std::filesystem::path& path) const {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCategory::io, "cannot write " + tmp.string());
        out.write(kSnapshotMagic, sizeof kSnapshotMagic);
        BinaryWriter w(out);
        w.u32(kSnapshotVersion);
        w.u64(config_.num_perm);
        w.u64(config_.seed);
        w.f64(config_.threshold);
        w.u64(lsh_.params().bands);
        w.u64(lsh_.params().rows);
        w.u64(ids_.size());
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            w.bytes(ids_[i]);
            w.u64(shingles_[i].size());
            for (Shingle s : shingles_[i]) w.u64(s);
            for (std::uint64_t h : signatures_[i]) w.u64(h);
        }
        if (!out) throw Error(ErrorCategory::io, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

CodeIndex CodeIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::io, "cannot read " + path.string());
    char magic[sizeof kSnapshotMagic];
    BinaryReader r(in);
    r.read(magic, sizeof magic);
    if (std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0)
        throw Error(ErrorCategory::data, path.string() + ": not a code index snapshot");
    const std::uint32_t version = r.u32();
    if (version != kSnapshotVersion)
        throw Error(ErrorCategory::data, path.string() + ": unsupported snapshot version " +
                                             std::to_string(version));
    CodeIndexConfig cfg;
    cfg.num_perm = r.u64();
    cfg.seed = r.u64();
    cfg.threshold = r.f64();
    LshParams params;
    params.bands = r.u64();
    params.rows = r.u64();
    CodeIndex index(cfg);
    if (!(index.lsh_params() == params))
        throw Error(ErrorCategory::data, path.string() + ": band layout does not match config");
    const std::uint64_t count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string id = r.bytes();
        std::vector<Shingle> shingles(r.u64());
        for (auto& s : shingles) s = r.u64();
        Signature sig(cfg.num_perm);
        for (auto& h : sig) h = r.u64();
        index.insert_prepared(std::move(id), std::move(shingles), std::move(sig));
    }
    return index;
}

}  // namespace editforge

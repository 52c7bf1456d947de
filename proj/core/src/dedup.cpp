#include "editforge/dedup.hpp"

#include <limits>
#include <span>

#include "editforge/rouge.hpp"

namespace editforge {
namespace {

constexpr std::uint32_t kUnknownToken = std::numeric_limits<std::uint32_t>::max();

}  // namespace

InstructionMatch is_instruction_dup(std::string_view candidate,
                                    const std::vector<std::pair<std::string, std::string>>& pool,
                                    double threshold) {
    InstructionMatch best;
    for (const auto& [id, text] : pool) {
        const double score = rouge_l(candidate, text);
        if (!best.nearest_id || score > best.score) {
            best.score = score;
            best.nearest_id = id;
        }
    }
    best.duplicate = best.score > threshold;
    return best;
}

std::vector<std::uint32_t> InstructionIndex::encode(std::string_view text) const {
    std::vector<std::uint32_t> out;
    for (const std::string& tok : rouge_tokens(text)) {
        auto it = vocab_.find(tok);
        out.push_back(it == vocab_.end() ? kUnknownToken : it->second);
    }
    return out;
}

InstructionMatch InstructionIndex::check(std::string_view candidate) const {
    const auto cand = encode(candidate);
    InstructionMatch best;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        const auto& ref = tokens_[i];
        if (best.nearest_id) {
            // LCS <= min(n, m), so F1 <= 2·min / (n + m).
            const std::size_t lo = std::min(cand.size(), ref.size());
            const double bound =
                cand.empty() || ref.empty()
                    ? 0.0
                    : 2.0 * static_cast<double>(lo) / static_cast<double>(cand.size() + ref.size());
            if (bound <= best.score) continue;
        }
        const std::size_t lcs = lcs_length(std::span<const std::uint32_t>(cand),
                                           std::span<const std::uint32_t>(ref));
        const double score = rouge_l_f1(lcs, cand.size(), ref.size());
        if (!best.nearest_id || score > best.score) {
            best.score = score;
            best.nearest_id = ids_[i];
        }
    }
    best.duplicate = best.score > threshold_;
    return best;
}

void InstructionIndex::add(std::string id, std::string_view text) {
    std::vector<std::uint32_t> encoded;
    for (const std::string& tok : rouge_tokens(text)) {
        auto [it, inserted] = vocab_.try_emplace(tok, static_cast<std::uint32_t>(vocab_.size()));
        encoded.push_back(it->second);
    }
    ids_.push_back(std::move(id));
    tokens_.push_back(std::move(encoded));
}

}  // namespace editforge

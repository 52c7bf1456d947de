#include "editforge/rouge.hpp"

#include "editforge/util/text.hpp"

namespace editforge {

std::vector<std::string> rouge_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    for (std::string_view tok : text::split_whitespace(text)) tokens.push_back(text::to_lower(tok));
    return tokens;
}

double rouge_l_f1(std::size_t lcs, std::size_t candidate_len, std::size_t reference_len) {
    if (lcs == 0 || candidate_len == 0 || reference_len == 0) return 0.0;
    // 2PR/(P+R) with P = L/m and R = L/n simplifies to 2L/(m+n), which takes
    // a single rounding step.
    return 2.0 * static_cast<double>(lcs) / static_cast<double>(candidate_len + reference_len);
}

double rouge_l(std::string_view candidate, std::string_view reference) {
    const auto cand = rouge_tokens(candidate);
    const auto ref = rouge_tokens(reference);
    const std::size_t lcs =
        lcs_length(std::span<const std::string>(cand), std::span<const std::string>(ref));
    return rouge_l_f1(lcs, cand.size(), ref.size());
}

}  // namespace editforge

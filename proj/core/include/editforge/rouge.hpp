#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace editforge {

/// Lowercased whitespace tokens.
std::vector<std::string> rouge_tokens(std::string_view text);

/// Longest common subsequence length; O(|a|·|b|) time, O(|b|) space.
template <class T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (const T& x : a) {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            row[j] = (x == b[j - 1]) ? diag + 1 : std::max(up, row[j - 1]);
            diag = up;
        }
    }
    return row[b.size()];
}

/// ROUGE-L F1 from an LCS length and the two sequence lengths.
double rouge_l_f1(std::size_t lcs, std::size_t candidate_len, std::size_t reference_len);

/// ROUGE-L F-measure (beta = 1) over lowercased whitespace tokens.
double rouge_l(std::string_view candidate, std::string_view reference);

}  // namespace editforge

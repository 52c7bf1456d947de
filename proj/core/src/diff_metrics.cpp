#include "editforge/diff_metrics.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "editforge/error.hpp"
#include "editforge/util/text.hpp"

namespace editforge {

DiffStats line_diff(std::string_view input_code, std::string_view output_code) {
    std::unordered_set<std::string_view> input_lines;
    for (std::string_view line : text::split_lines(input_code)) input_lines.insert(line);
    std::unordered_set<std::string_view> output_lines;
    for (std::string_view line : text::split_lines(output_code)) output_lines.insert(line);

    std::size_t common = 0;
    for (std::string_view line : output_lines) common += input_lines.count(line);

    DiffStats stats;
    stats.union_size = input_lines.size() + output_lines.size() - common;
    stats.n_diff = stats.union_size - common;
    stats.r_diff = stats.union_size == 0
                       ? 0.0
                       : static_cast<double>(stats.n_diff) /
                             static_cast<double>(stats.union_size);
    stats.bin = edit_ratio_bin(stats.r_diff);
    return stats;
}

int edit_ratio_bin(double r_diff) {
    if (!(r_diff >= 0.0 && r_diff <= 1.0))
        throw ContractViolation("edit_ratio_bin: r_diff outside [0, 1]: " +
                                std::to_string(r_diff));
    // For r = k/5 the product 5r rounds back to exactly k, so edges land in
    // the upper bin as intended.
    int bin = static_cast<int>(std::floor(r_diff * kEditRatioBins)) + 1;
    return bin > kEditRatioBins ? kEditRatioBins : bin;
}

}  // namespace editforge

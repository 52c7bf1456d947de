#pragma once

#include <cstddef>
#include <string_view>

namespace editforge {

inline constexpr int kEditRatioBins = 5;

/// Edit complexity of an input/output code pair.
///
/// Lines are compared verbatim and treated as sets, so repeated identical
/// lines count once: n_diff = |I ∪ O| - |I ∩ O| and r_diff = n_diff / |I ∪ O|
/// (0 when both sides are empty).
struct DiffStats {
    std::size_t n_diff = 0;
    std::size_t union_size = 0;
    double r_diff = 0.0;
    int bin = 1;

    friend bool operator==(const DiffStats&, const DiffStats&) = default;
};

DiffStats line_diff(std::string_view input_code, std::string_view output_code);

/// Equal-width fifths of [0, 1]; the last bin is closed. Throws
/// ContractViolation outside [0, 1] (including NaN).
int edit_ratio_bin(double r_diff);

}  // namespace editforge

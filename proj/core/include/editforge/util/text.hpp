#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace editforge::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Splits on '\n'. A trailing newline terminates the last line rather than
/// starting an empty one; empty input has no lines.
std::vector<std::string_view> split_lines(std::string_view s);

std::vector<std::string_view> split_whitespace(std::string_view s);

/// Trims and replaces every internal whitespace run with a single space.
std::string collapse_whitespace(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Structural UTF-8 validation (no overlongs/surrogates check beyond lead bytes).
bool is_valid_utf8(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace editforge::text

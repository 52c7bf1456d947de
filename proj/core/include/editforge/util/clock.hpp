#pragma once

#include <string>

namespace editforge {

/// Current UTC time as 2024-01-31T12:00:00Z.
std::string utc_timestamp();

}  // namespace editforge

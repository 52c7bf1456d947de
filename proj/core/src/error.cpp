#include "editforge/error.hpp"

namespace editforge {

std::string_view to_string(ErrorCategory category) noexcept {
    switch (category) {
        case ErrorCategory::config: return "config";
        case ErrorCategory::io: return "io";
        case ErrorCategory::backend: return "backend";
        case ErrorCategory::data: return "data";
        case ErrorCategory::contract: return "contract";
        case ErrorCategory::not_found: return "not_found";
        case ErrorCategory::conflict: return "conflict";
        case ErrorCategory::internal: return "internal";
    }
    return "internal";
}

int exit_code(ErrorCategory category) noexcept {
    switch (category) {
        case ErrorCategory::config: return 2;
        case ErrorCategory::io: return 3;
        case ErrorCategory::backend: return 4;
        case ErrorCategory::data: return 5;
        case ErrorCategory::contract: return 6;
        case ErrorCategory::not_found: return 7;
        case ErrorCategory::conflict: return 8;
        case ErrorCategory::internal: return 1;
    }
    return 1;
}

}  // namespace editforge

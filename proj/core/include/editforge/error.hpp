#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace editforge {

enum class ErrorCategory {
    config,
    io,
    backend,
    data,
    contract,
    not_found,
    conflict,
    internal,
};

std::string_view to_string(ErrorCategory category) noexcept;

/// Process exit code used by the CLI for each category.
int exit_code(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Raised when a caller breaks a documented precondition.
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& message)
        : Error(ErrorCategory::contract, message) {}
};

}  // namespace editforge

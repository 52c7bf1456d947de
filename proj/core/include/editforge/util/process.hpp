#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace editforge {

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs `argv` (argv[0] resolved through PATH) without a shell and captures
/// stdout/stderr. Throws Error{io} when the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& cwd = {});

}  // namespace editforge

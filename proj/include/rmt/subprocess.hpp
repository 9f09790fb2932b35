#pragma once

#include <string>

namespace rmt::proc {

struct RunResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string stdout_text;
    std::string stderr_text;
};

/// Runs `sh -c command` with a deadline; stdout/stderr are captured through
/// temp files under scratch_dir. The process group is killed on timeout.
RunResult run_command(const std::string& command, int timeout_s, const std::string& scratch_dir);

} // namespace rmt::proc

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace homog {

// Parses argv-style arguments (program name excluded), dispatches to the
// requested subcommand, and returns the process exit code: 0 on success,
// 1 on errors, 2 when a computation finished but a certified bound failed.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace homog

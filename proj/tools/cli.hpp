#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scop::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // usage, parse or I/O error
inline constexpr int kExitUnsat = 2;    // unsatisfiable, or propagation failed

/// Runs the tool with `args` (program name excluded).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scop::cli

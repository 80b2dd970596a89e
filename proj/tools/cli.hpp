#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wtn::cli {

enum ExitCode : int { ok = 0, usage = 1, data_error = 2, divergence = 3 };

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Version string baked in at configure time.
std::string version();

}  // namespace wtn::cli

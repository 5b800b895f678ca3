#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kpod::cli {

/// Runs the command line `args` (without the program name). Returns the exit
/// code: 0 success, 1 numerical or data failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kpod::cli

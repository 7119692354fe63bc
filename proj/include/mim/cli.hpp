#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mim::cli {

/// Runs the command line `args` (args[0] is the program name).
/// Returns 0 on success, 1 on numerical or I/O failure, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mim::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace regionplan {

/// Runs the regionplan command line. `args` excludes the program name.
/// Exit codes: 0 ok, 1 validation, 2 planning, 3 enumeration bound, 4 simulation.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace regionplan

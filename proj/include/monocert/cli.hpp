#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace monocert {

/// Runs the `monocert` command line. `args` excludes the program name.
/// Returns 0 on PASS/CERTIFIED, 1 on FAIL/REJECTED/INCONCLUSIVE and 2 on
/// any error, with the message written to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace monocert

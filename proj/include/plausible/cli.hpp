#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace plausible {

/// Entry point behind the `plausible` binary. `args` excludes the program
/// name. Returns the process exit code: 0 success, 1 input/schema error,
/// 2 domain failure, 3 internal invariant violation.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plausible

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mll {

/// Full command dispatch; returns the process exit code.
/// 0 computed (whatever the verdict), 1 usage error, 2 input error,
/// 3 internal equivalence breach.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

}  // namespace mll

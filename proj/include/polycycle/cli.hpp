#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace polycycle {

enum ExitCode { kExitOk = 0, kExitUsage = 2, kExitModel = 3, kExitNumeric = 4 };

/// Runs one command line (args excludes the program name). Documents go to `out` unless --out
/// is given; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polycycle

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace symper::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUnstable = 1,  // analyze: system unstable; verify: an invariant failed
    kExitBadInput = 2,
    kExitNumerical = 3,
};

/// Entry point behind the `symper` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace symper::cli

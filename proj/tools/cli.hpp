#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace degchemo::cli {

enum ExitCode : int {
    ok = 0,
    verdict_failure = 1,
    usage_error = 2,
    solver_failure = 3,
};

/// Entry point behind the `degchemo` binary; args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace degchemo::cli

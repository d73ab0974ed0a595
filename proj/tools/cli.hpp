#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aoci::cli {

enum ExitCode : int {
    kSuccess = 0,
    kValidation = 1,
    kUsage = 2,
    kIo = 3,
};

/// Runs one invocation. args excludes the program name. '-' paths use the
/// given streams.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace aoci::cli

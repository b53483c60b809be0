#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace refspect {

inline constexpr const char* kVersion = "1.0.0";

// Runs the command line; args excludes the program name. Returns the process
// exit code: 0 success, 1 usage error, 2 data error.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace refspect

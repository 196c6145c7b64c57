#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vstain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // bad flags, config or manifest
inline constexpr int kExitPartial = 2;  // some inputs failed, the rest were processed

/// Entry point shared by the executable and the tests; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vstain::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nadv {

// Exit codes of dispatch().
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // configuration, input or runtime error
inline constexpr int kExitUsage = 2;    // unknown subcommand or flag

// Runs one CLI invocation; args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nadv

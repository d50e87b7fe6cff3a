#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace valence {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `valence` command. `args` excludes the program name; `in` feeds
/// interactive play. Returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace valence

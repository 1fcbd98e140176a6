#pragma once

#include <string>
#include <vector>

namespace oim::cli {

/// Exit codes: 0 on success, 1 for usage errors (bad flags, keys, or
/// option combinations), 2 for runtime failures (unreadable files,
/// oracle size limits).
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point used by the `oim` binary. Parses the subcommand and its
/// flags, runs it, and reports errors on stderr.
int run(int argc, const char* const* argv);

/// Testing-friendly overload: `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace oim::cli

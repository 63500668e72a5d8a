#pragma once

#include <ostream>

namespace d3l::cli {

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Entry point of the `d3l` tool: subcommands solve, compare, bench, balance.
/// Writes human-readable output to `out` and diagnostics to `err`.
[[nodiscard]] int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace d3l::cli

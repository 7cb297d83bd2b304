#pragma once

#include <string_view>

namespace cbleak {

inline constexpr std::string_view kToolName = "cbleak";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Subcommands: generate, measure, sweep, cbm-sweep, plot.
// Exit codes: 0 success, 1 invalid arguments/config, 2 runtime failure.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace cbleak

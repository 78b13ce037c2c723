#pragma once

// Command-line front end. Every subcommand writes one CSV data file and a
// JSON manifest (default: <out>.manifest.json).
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <ostream>
#include <string>
#include <vector>

namespace rodeo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rodeo

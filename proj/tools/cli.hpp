#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fplab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;  // usage, unknown subcommand, bad or missing config
inline constexpr int kExitData = 2;    // unreadable or malformed data and CSV files

/// Runs one invocation. args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace fplab::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cspin::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. Results and error JSON go to `out`, usage text to `err`.
/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace cspin::cli

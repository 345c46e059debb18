#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace commoncv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;

/// Runs the command line (arguments after the program name). Subcommands:
/// estimate, ci, test, simulate, examples. Diagnostics go to `err` as a
/// single line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace commoncv

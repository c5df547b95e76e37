#pragma once

#include <string>
#include <vector>

namespace tsaug::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

// Parses the command line and runs one subcommand. Returns the process exit
// code: 0 on success, 2 for bad arguments, configs, inputs or I/O, 3 for
// numeric failures.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace tsaug::cli

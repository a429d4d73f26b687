#pragma once

#include "heterosim/config.hpp"

#include <iosfwd>

namespace heterosim {

/// Thrown after the argument parser has printed help or a usage error.
struct CliExit {
  int code = 0;
};

/// Builds a RunConfig from command-line arguments. `--config FILE` is read
/// first; explicit flags override it. Throws ConfigError on invalid values
/// and CliExit for help or usage errors.
RunConfig parse_args(int argc, const char* const* argv);

/// Executes a validated config, writing outputs under the resolved output
/// directory and progress lines to `log`.
void run(const RunConfig& config, std::ostream& log);

/// Full entry point: parse, validate, run. Returns the process exit code.
int main_entry(int argc, const char* const* argv);

}  // namespace heterosim

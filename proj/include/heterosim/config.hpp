#pragma once

#include "heterosim/simgrid.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace heterosim {

/// Diagnostic for malformed configuration; carries the offending line (0
/// when the problem is not tied to a line) and key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, std::string key = {});

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

enum class Command { grid, differential, large_sample, brier_sweep, scenario, report };

const char* to_string(Command command) noexcept;
Command command_from_string(const std::string& name);

struct RunConfig {
  Command command = Command::grid;

  // grid
  std::vector<Family> families;  // empty means every family
  NoiseScale noise_scale = NoiseScale::standard_deviation;

  // replicate runs
  Index reps = 10'000;
  Index n_deriv = 2000;
  Index n_valid = 2000;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  Index curve_reps = 0;
  bool svg = false;
  LoessOptions loess;

  // large-sample / brier-sweep
  std::vector<std::string> panels;  // empty means every panel
  Index large_n = 1'000'000;
  std::vector<Scalar> mv_percent = {25, 50, 75, 100, 150, 200, 300, 400};

  // scenario
  std::vector<Scenario> scenarios;

  // report
  std::string input;

  std::string outdir;

  friend bool operator==(const RunConfig&, const RunConfig&);
};

/// Parses the sectioned `key = value` format:
///
///   # comment
///   [run]
///   command = grid
///   family = single, two_pred_both
///   reps = 1000
///   seed = 42
///
///   [scenario my_id]
///   family = single
///   deriv.var_eps = 1.0        # applies to every predictor, both classes
///   valid.psi1 = 0.25          # case class only
///   valid2.theta = 2.0         # predictor 2 only
///
/// Measurement keys are psi, theta, var_eps (both classes) or psi0, theta0,
/// var_eps0, psi1, theta1, var_eps1 (per class). Unknown keys are rejected.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

/// Inverse of parse_config: parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

/// Validates invariants (reps >= 1, seed present, ...). Throws ConfigError.
void validate(const RunConfig& config);

/// Scenario list implied by a grid / differential / scenario config.
std::vector<Scenario> scenarios_for(const RunConfig& config);

/// Output directory: explicit value, else $HETEROSIM_OUTDIR, else "heterosim-out".
std::string resolve_outdir(const RunConfig& config);

}  // namespace heterosim

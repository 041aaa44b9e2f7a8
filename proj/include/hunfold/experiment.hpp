#pragma once

// Config-driven experiments: parsing, validation, the verification battery
// and the report files written for each command.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hunfold/homogenize.hpp"

namespace hunfold {

enum class Command { verify, unfold_demo, cell, homogenize, converge, control };

std::string_view command_name(Command c) noexcept;
/// Throws ConfigError for unknown names.
Command parse_command(std::string_view name);

/// Parse or validation failure of an experiment config.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CoefficientSpec {
  std::string preset = "laminate";  // identity | constant | laminate | checkerboard
  double a0 = 2.0;                  // laminate (a0 + a1 sin(freq pi y1)) I
  double a1 = 1.0;
  int freq = 1;
  Matrix2 matrix{1.0, 0.0, 0.0, 1.0};  // constant
  double low = 1.0;                    // checkerboard values
  double high = 4.0;

  PeriodicCoefficient build() const;
  friend bool operator==(const CoefficientSpec&, const CoefficientSpec&) = default;
};

struct SourceSpec {
  std::string preset = "x1";  // zero | constant | x1 | sin
  double value = 1.0;         // constant level, or amplitude

  ScalarFn build() const;
  friend bool operator==(const SourceSpec&, const SourceSpec&) = default;
};

struct ExperimentConfig {
  Command command = Command::verify;
  BoxDomain omega{{0.0, 0.0, 0.0}, {2.0, 2.0, 2.0}};
  std::vector<double> eps{0.5, 0.25, 0.125};
  Resolution grid{64, 64, 256};
  int cell_n = 32;
  int control_n = 16;
  CoefficientSpec coefficient;
  SourceSpec source;
  double rho = 1.0;
  double solver_tol = 1e-8;
  int solver_maxit = 20000;
  double cell_tol = 1e-12;
  double control_tol = 1e-11;
  int control_maxit = 200;
  int samples = 20000;  // random points per verify group
  std::uint64_t seed = 20261016;
  std::string output = "out";

  /// Throws ConfigError.
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig default_config(Command c);

/// key = value lines under [section] headers. Starts from the defaults of
/// `command` (or of the file's own `command` key); a conflicting command
/// in the file is an error. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in, std::optional<Command> command = std::nullopt);
ExperimentConfig parse_config(std::string_view text, std::optional<Command> command = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Command> command = std::nullopt);

/// Sets one key, "section.key" or a top-level "command"/"key". Throws ConfigError.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

std::string to_ini(const ExperimentConfig& cfg);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(std::string_view json);

struct Check {
  std::string name;
  bool passed = false;
  bool gating = true;  // false: reported, does not decide the exit status
  std::string detail;
};

struct RunReport {
  Command command = Command::verify;
  bool passed = false;
  bool numerical_failure = false;
  std::vector<Check> checks;
  std::vector<std::string> files;  // written, relative to the output directory
  std::string result_json;         // contents of result.json
  double wall_seconds = 0.0;
};

/// Runs the command and writes its files under out_dir (created if needed).
/// Config errors throw ConfigError; solver failures are reported in the
/// result with numerical_failure set.
RunReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// The verification battery alone (no files).
std::vector<Check> verify_battery(const ExperimentConfig& cfg);

/// %.17g
std::string format_double(double v);

}  // namespace hunfold

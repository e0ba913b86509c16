#pragma once

// Experiment descriptions (JSON), their validation, dispatch to the
// simulation modules and CSV/JSON report emission.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polylab/error.hpp"
#include "polylab/parallel.hpp"

namespace polylab {

enum class Command {
  kKernelTable,
  kBound,
  kPhase,
  kClt,
  kMgf,
  kHermiteCheck,
  kYnDecay,
  kSecondMoment,
  kCollision,
};

std::string_view command_name(Command command);
std::optional<Command> parse_command_name(std::string_view name);

enum class BetaMode { kFraction, kAbsolute };

// Invalid configuration; `field` names the offending key when there is one.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidArgument(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  Command command = Command::kClt;
  int d = 3;
  double K = 1.0;
  double h = 0.25;
  double dt = 0.05;
  std::vector<double> horizons;  // "T" or "T_list"
  BetaMode beta_mode = BetaMode::kFraction;
  std::vector<double> betas;  // "beta_frac" or "beta_abs"
  std::size_t n_paths = 2000;
  std::uint64_t noise_seed = 1;
  std::size_t n_noise_seeds = 1;
  std::uint64_t path_seed_start = 0;
  std::size_t chunk_size = 256;
  std::string output_path;
  std::vector<int> n_index;                  // "n"
  std::vector<std::vector<double>> lambdas;  // "lambda"
  std::size_t n_pairs = 100000;
  int n_radii = 512;
  int quad_points = 64;
  double multiplier = 1.0;
  double t_max = 1e4;  // "T_max"
  std::size_t oracle_paths = 40000;

  bool operator==(const ExperimentConfig&) const = default;
};

// Parses and validates a JSON document, filling command-dependent defaults.
// Throws ConfigError (syntax errors report the byte position).
ExperimentConfig parse_config(std::string_view text);

// Full JSON echo of a config; parse_config(config_to_json(c)) == c.
std::string config_to_json(const ExperimentConfig& config);

// Notes for every horizon that is not an integer number of steps.
std::vector<std::string> rounding_notes(const ExperimentConfig& config);

// Precedence: flag > environment value > config file.
void apply_noise_seed_override(ExperimentConfig& config, std::optional<std::uint64_t> flag_value,
                               const char* env_value);

inline constexpr const char* kNoiseSeedEnv = "POLYLAB_NOISE_SEED";

struct ExperimentOutput {
  std::string payload;    // CSV or JSON text
  std::string extension;  // "csv" or "json"
  std::vector<std::pair<std::string, double>> summary;
};

// Runs the experiment and renders its output without touching the disk.
ExperimentOutput execute(const ExperimentConfig& config, unsigned threads = 1);

struct ExperimentReport {
  ExperimentConfig config;
  std::string build_id;
  double wall_seconds = 0.0;
  std::string output_path;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::string> notes;
};

// execute() plus an atomic write of the payload.
ExperimentReport run(const ExperimentConfig& config, unsigned threads = 1);

std::string report_to_json(const ExperimentReport& report);

// Machine-readable failure description for the CLI.
std::string error_to_json(const std::exception& error);

std::string build_id();

}  // namespace polylab

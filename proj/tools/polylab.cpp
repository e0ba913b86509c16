// polylab <command> --config <file> [--noise-seed N] [--out PATH] [--threads N]
//
// The noise seed is taken from --noise-seed, else from POLYLAB_NOISE_SEED,
// else from the config file.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "polylab/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directed polymer simulations in a mollified Gaussian environment"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> noise_seed;
  std::string out_path;
  unsigned threads = 1;

  for (const char* name : {"kernel-table", "bound", "phase", "clt", "mgf", "hermite-check",
                           "yn-decay", "second-moment", "collision"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment description (JSON)")->required();
    sub->add_option("--noise-seed", noise_seed, "master seed of the noise field");
    sub->add_option("--out", out_path, "output file (overrides output_path)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    polylab::ExperimentConfig config = polylab::parse_config(read_file(config_path));
    if (polylab::command_name(config.command) != command) {
      throw polylab::ConfigError("command", "config describes '" +
                                                std::string(polylab::command_name(config.command)) +
                                                "' but '" + command + "' was requested");
    }
    polylab::apply_noise_seed_override(config, noise_seed, std::getenv(polylab::kNoiseSeedEnv));
    if (!out_path.empty()) config.output_path = out_path;
    const polylab::ExperimentReport report = polylab::run(config, threads);
    std::cout << polylab::report_to_json(report) << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << polylab::error_to_json(e) << '\n';
    return 1;
  }
}

// evolver <experiment> --config <path> [--out <dir>] [--seed <u64>] [--timing]

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "evolver/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Run a named evolution-equation experiment from a JSON config."};
  app.require_subcommand(1);

  evolver::RunOptions options;
  std::string config;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool timing = false;
  std::string chosen;

  for (const auto& name : evolver::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Seed overriding numeric.seed");
    sub->add_flag("--timing", timing, "Record wall_time in the summary");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  options.out_dir = out_dir;
  options.timing = timing;
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) options.seed = seed;
  }

  const evolver::RunResult result = evolver::run_experiment_file(chosen, config, options);
  if (result.exit_code == 0) {
    std::cout << result.message << "\n";
  } else {
    std::cerr << (result.exit_code == 2 ? "config error: " : "") << result.message << "\n";
  }
  return result.exit_code;
}

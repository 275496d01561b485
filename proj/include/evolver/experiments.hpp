#pragma once

// Named experiments driven by JSON configs. Each run writes
// <out>/<experiment>.csv and <out>/<experiment>.summary.json.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace evolver {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  ///< overrides numeric.seed
  bool timing = false;                ///< adds wall_time to the summary
};

struct RunResult {
  int exit_code = 0;  ///< 0 pass, 1 numeric failure, 2 configuration error
  std::string message;
  std::vector<std::string> failed;  ///< names of failing metrics or the error kind
};

/// chernoff, evolsys, branching, degree, averaging, continuation,
/// wave-periodic, wave-energy.
const std::vector<std::string>& experiment_names();

RunResult run_experiment(const std::string& experiment, const std::string& config_text, const RunOptions& options);
RunResult run_experiment_file(const std::string& experiment, const std::filesystem::path& config_path,
                              const RunOptions& options);

}  // namespace evolver

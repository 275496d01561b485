#pragma once

// Named example models shipped with the experiment runner.

#include <optional>
#include <string>
#include <vector>

#include "evolver/degree.hpp"
#include "evolver/wave.hpp"

namespace evolver {

struct ModelSetup {
  std::string name;
  GeneratorFamily family;
  NonlinearField field;
  Region region;                    ///< default region for degree and branching runs
  std::optional<WaveSystem> wave;   ///< set for wave models
  std::optional<WaveParams> wave_params;
};

/// scalar-linear: x' = -x + 2 + sin(2 pi t / T), T = 1.
ModelSetup scalar_linear();
/// rotation-damped-2d: A(t) = [[-1 - sin(2 pi t/T)/2, -2], [2, -1]] with
/// forcing (1 + cos(2 pi t/T), 1/2 + sin(2 pi t/T)), T = 1.
ModelSetup rotation_damped_2d();
/// Wave models on (0, pi), T = 2 pi, f(t, s) = tanh(s) + cos(2 pi t / T):
/// k = 1 with beta = 1, and k = 3 with beta = 1 + cos(2 pi t / T) / 2.
WaveParams wave_k1_params();
WaveParams wave_k3_params();
ModelSetup wave_setup(const std::string& name, const WaveParams& params);

/// Throws configuration for unknown names.
ModelSetup catalog_model(const std::string& name);
const std::vector<std::string>& catalog_names();

}  // namespace evolver

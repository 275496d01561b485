#include "evolver/catalog.hpp"

#include <cmath>
#include <numbers>

#include "evolver/error.hpp"
#include "evolver/semigroup.hpp"

namespace evolver {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

ModelSetup scalar_linear() {
  ModelSetup m{"scalar-linear", constant_family(Matrix::Constant(1, 1, -1.0), 1.0), {},
               Region::box(Vector::Constant(1, 0.0), Vector::Constant(1, 4.0)), std::nullopt,
               std::nullopt};
  m.field.dim = 1;
  m.field.eval = [](double t, const Vector&) { return Vector::Constant(1, 2.0 + std::sin(kTwoPi * t)); };
  m.field.lipschitz = 0.0;
  m.field.growth = 3.0;
  m.field.period = 1.0;
  return m;
}

ModelSetup rotation_damped_2d() {
  GeneratorFamily family;
  family.dim = 2;
  family.period = 1.0;
  family.generator = [](double t) {
    Matrix a(2, 2);
    a << -1.0 - 0.5 * std::sin(kTwoPi * t), -2.0, 2.0, -1.0;
    return a;
  };
  family.omega = 0.5;
  family.differentiable = true;

  NonlinearField field;
  field.dim = 2;
  field.eval = [](double t, const Vector&) {
    return Vector{{1.0 + std::cos(kTwoPi * t), 0.5 + std::sin(kTwoPi * t)}};
  };
  field.growth = 2.5;
  field.period = 1.0;
  return ModelSetup{"rotation-damped-2d", std::move(family), std::move(field),
                    Region::ball(Vector::Zero(2), 2.0), std::nullopt, std::nullopt};
}

WaveParams wave_k1_params() {
  WaveParams p;
  p.ell = std::numbers::pi;
  p.k = 1;
  p.period = kTwoPi;
  p.beta = [](double) { return 1.0; };
  p.f = [](double t, double s) { return std::tanh(s) + std::cos(t); };
  p.lipschitz = 1.0;
  p.growth = 2.0;
  p.f_inf = 0.0;
  return p;
}

WaveParams wave_k3_params() {
  WaveParams p = wave_k1_params();
  p.k = 3;
  p.beta = [](double t) { return 1.0 + 0.5 * std::cos(t); };
  return p;
}

ModelSetup wave_setup(const std::string& name, const WaveParams& params) {
  WaveSystem system = build_wave_model(params);
  const Eigen::Index d = system.model.dim();
  Region region = Region::ball(Vector::Zero(d), 4.0);
  return ModelSetup{name, system.family, system.field, std::move(region), std::move(system), params};
}

ModelSetup catalog_model(const std::string& name) {
  if (name == "scalar-linear") return scalar_linear();
  if (name == "rotation-damped-2d") return rotation_damped_2d();
  if (name == "wave-k1") return wave_setup(name, wave_k1_params());
  if (name == "wave-k3") return wave_setup(name, wave_k3_params());
  fail(ErrorKind::kConfiguration, "unknown catalog model '" + name + "'");
}

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"scalar-linear", "rotation-damped-2d", "wave-k1", "wave-k3"};
  return names;
}

}  // namespace evolver

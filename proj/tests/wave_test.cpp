#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "evolver/catalog.hpp"
#include "evolver/random.hpp"
#include "evolver/wave.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace evolver {
namespace {

using testing::kind_of;
using testing::message_of;

WaveParams linear_params(int k, double beta = 1.0) {
  WaveParams p;
  p.k = k;
  p.beta = [beta](double) { return beta; };
  return p;
}

// f(t, s) = f_inf s + cos(t): the Galerkin system is affine.
WaveParams affine_params(double f_inf) {
  WaveParams p = wave_k3_params();
  p.f = [f_inf](double t, double s) { return f_inf * s + std::cos(t); };
  p.f_inf = f_inf;
  p.lipschitz = std::abs(f_inf);
  p.growth = std::abs(f_inf) + 1.0;
  return p;
}

TEST(WaveModel, DampedOscillator) {
  const WaveModel m(linear_params(1));
  const Matrix a = m.generator(0.3);
  EXPECT_LE((a - Matrix{{0.0, 1.0}, {-1.0, -1.0}}).norm(), 1e-15);
}

TEST(WaveModel, DirichletEigenvalues) {
  const WaveModel m(linear_params(3));
  EXPECT_NEAR(m.eigenvalues()(0), 1.0, 1e-14);
  EXPECT_NEAR(m.eigenvalues()(1), 4.0, 1e-14);
  EXPECT_NEAR(m.eigenvalues()(2), 9.0, 1e-14);
  WaveParams p = linear_params(2);
  p.ell = 2.0;
  EXPECT_NEAR(WaveModel(p).eigenvalues()(1), std::pow(2.0 * std::numbers::pi / 2.0, 2), 1e-12);
}

TEST(WaveModel, FamilyPassesValidation) {
  for (const auto& p : {wave_k1_params(), wave_k3_params()}) {
    const WaveSystem w = build_wave_model(p);
    EXPECT_TRUE(validate(w.family).ok());
    Rng rng(1);
    EXPECT_TRUE(validate(w.field, rng, 100, 5.0).ok());
  }
}

TEST(WaveModel, ParameterErrors) {
  WaveParams p = wave_k3_params();
  p.k = 65;
  EXPECT_EQ(kind_of([&] { build_wave_model(p); }), ErrorKind::kConfiguration);
  p = wave_k3_params();
  p.beta = [](double t) { return std::cos(t); };
  EXPECT_NE(message_of([&] { build_wave_model(p); }).find("beta"), std::string::npos);
  p = wave_k3_params();
  p.lipschitz = 0.5;
  EXPECT_NE(message_of([&] { build_wave_model(p); }).find("Lipschitz"), std::string::npos);
  p = wave_k3_params();
  p.f = [](double, double s) { return 2.0 * s; };
  p.lipschitz = 2.0;
  p.growth = 2.0;
  EXPECT_NE(message_of([&] { build_wave_model(p); }).find("f_inf"), std::string::npos);
  p = wave_k3_params();
  p.f = [](double t, double s) { return std::tanh(s) + t; };
  EXPECT_EQ(kind_of([&] { build_wave_model(p); }), ErrorKind::kConfiguration);
  p = wave_k3_params();
  p.eta = 1.5;
  EXPECT_EQ(kind_of([&] { build_wave_model(p); }), ErrorKind::kConfiguration);
}

TEST(WaveModel, ResonanceIsFlagged) {
  WaveParams p = affine_params(-1.0);
  EXPECT_NE(message_of([&] { build_wave_model(p); }).find("resonance"), std::string::npos);
  p.check_resonance = false;
  EXPECT_NEAR(build_wave_model(p).model.resonance_gap(), 0.0, 1e-14);
  EXPECT_NEAR(WaveModel(affine_params(2.5)).resonance_gap(), 3.5, 1e-14);
}

TEST(WaveModel, CollocationProjectionIsExactOnModes) {
  WaveParams p = wave_k3_params();
  p.f = [](double, double s) { return s; };
  p.f_inf = 1.0;
  const WaveModel m(p);
  const Vector a{{0.3, -1.0, 0.25}};
  EXPECT_LE((m.project_nonlinearity(0.0, a) - a).norm(), 1e-13);
  const Vector u = m.collocate(a);
  const double x = m.nodes()(2);
  double direct = 0.0;
  for (int i = 0; i < 3; ++i) direct += a(i) * std::sqrt(2.0 / m.ell()) * std::sin((i + 1) * x);
  EXPECT_NEAR(u(2), direct, 1e-14);
}

TEST(EtaInner, Examples) {
  WaveModel m(linear_params(3));
  Rng rng(2);
  const Vector z1 = rng.vector(6);
  const Vector z2 = rng.vector(6);
  const Vector z3 = rng.vector(6);
  // eta = 0: (Lambda a1, a2) + (b1, b2)
  double product = z1.tail(3).dot(z2.tail(3));
  for (int i = 0; i < 3; ++i) product += m.eigenvalues()(i) * z1(i) * z2(i);
  EXPECT_NEAR(eta_inner(z1, z2, m, 0.0), product, 1e-13);
  const Vector e1 = Vector::Unit(6, 0);
  for (double eta : {0.1, 0.5, 1.0}) {
    EXPECT_NEAR(eta_inner(e1, e1, m, eta), 1.0 + eta * eta, 1e-14);
    EXPECT_NEAR(eta_inner(z1, z2, m, eta), eta_inner(z2, z1, m, eta), 1e-13);
    EXPECT_NEAR(eta_inner(2.0 * z1 - z3, z2, m, eta), 2.0 * eta_inner(z1, z2, m, eta) - eta_inner(z3, z2, m, eta),
                1e-12);
    EXPECT_NEAR(eta_inner(z1, z2, m, eta), z1.dot(m.metric(eta) * z2), 1e-12);
  }
  m.set_eta(0.25);
  EXPECT_NEAR(eta_inner(z1, z2, m), eta_inner(z1, z2, m, 0.25), 1e-15);
}

TEST(SelectEta, UnitDampingClosedForm) {
  const EtaChoice c = select_eta(WaveModel(linear_params(1)));
  EXPECT_NEAR(c.gamma, 2.0, 1e-12);
  EXPECT_NEAR(c.eta, 2.0 / 7.0, 1e-9);
  EXPECT_NEAR(c.analytic_rate, 1.0 / 7.0, 1e-9);
  EXPECT_GE(c.numeric_rate, c.analytic_rate - 1e-9);
}

TEST(SelectEta, NumericRateDominatesAnalyticRate) {
  for (int k : {1, 3, 8}) {
    for (bool varying : {false, true}) {
      WaveParams p = linear_params(k);
      if (varying) p.beta = [](double t) { return 1.0 + 0.5 * std::cos(t); };
      const EtaChoice c = select_eta(WaveModel(p));
      EXPECT_GT(c.analytic_rate, 0.0);
      EXPECT_GE(c.numeric_rate, c.analytic_rate - 1e-9) << k << " " << varying;
    }
  }
}

TEST(SelectEta, VanishingDampingIsRejected) {
  EXPECT_EQ(kind_of([] { build_wave_model(linear_params(1, 1e-13)); }), ErrorKind::kConfiguration);
}

TEST(WaveSystem, DissipativeInTheEtaMetric) {
  const WaveSystem w = build_wave_model(wave_k3_params());
  const Matrix g = w.model.metric();
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double t = rng.uniform(0.0, w.model.period());
    const Vector z = rng.vector(6);
    EXPECT_LE(z.dot(g * (w.model.generator(t) * z)), -w.eta.numeric_rate * z.dot(g * z) + 1e-12);
  }
  EXPECT_LE(contraction_check(EvolutionSystem(w.family, 2048), w.family.omega, 21), 1e-9);
}

TEST(Energy, UnforcedOscillator) {
  const WaveSystem w = build_wave_model(linear_params(1));
  const EvolutionSystem r(w.family, 4096);
  const Trajectory traj = mild_solve(r, w.field, Vector{{1.0, 0.0}}, 1.0, {2048, 1e-12, 10});
  EXPECT_LT(energy_residual(traj, w.model, wave_forcing(w.model, traj)), 1e-3);
  const Trajectory rest = mild_solve(r, w.field, Vector::Zero(2), 1.0, {2048, 1e-12, 10});
  EXPECT_EQ(energy_residual(rest, w.model, wave_forcing(w.model, rest)), 0.0);
  // E(t) decays since dE/dt = -|v|^2.
  EXPECT_LT(w.model.energy(traj.final_state()), w.model.energy(traj.states.front()));
}

TEST(Energy, ForcedRunMatchesRk4) {
  const WaveSystem w = build_wave_model(wave_k3_params());
  const EvolutionSystem r(w.family, 4096);
  const Vector x0{{0.5, 0.0, -0.2, 0.0, 0.3, 0.1}};
  const Trajectory traj = mild_solve(r, w.field, x0, 1.0, {2048, 1e-12, 400});
  EXPECT_LT(energy_residual(traj, w.model, wave_forcing(w.model, traj)), 1e-3);
  const auto path = oracle::rk4_path(
      [&](double t, const Vector& z) { return Vector(w.model.generator(t) * z + w.model.field(t, z)); }, x0, 0.0,
      w.model.period(), 2048 * 4);
  for (int i = 0; i <= 2048; i += 256) {
    EXPECT_NEAR(w.model.energy(traj.states[i]), w.model.energy(path[4 * i]), 1e-3) << i;
  }
}

TEST(Energy, GridMismatch) {
  const WaveSystem w = build_wave_model(linear_params(1));
  const Trajectory traj = mild_solve(EvolutionSystem(w.family, 64), w.field, Vector{{1.0, 0.0}}, 1.0, {64, 1e-12, 10});
  std::vector<Vector> short_forcing(3, Vector::Zero(2));
  EXPECT_EQ(kind_of([&] { energy_residual(traj, w.model, short_forcing); }), ErrorKind::kGridMismatch);
}

TEST(Invariance, LowModesEvolveIndependently) {
  WaveParams p = wave_k3_params();
  p.f = {};
  for (auto [k, kp] : {std::pair{1, 3}, {3, 8}}) {
    WaveParams small = p;
    small.k = k;
    small.eta = 0.1;
    WaveParams large = p;
    large.k = kp;
    large.eta = 0.1;
    const WaveSystem ws = build_wave_model(small);
    const WaveSystem wl = build_wave_model(large);
    const EvolutionSystem rs(ws.family, 512);
    const EvolutionSystem rl(wl.family, 512);
    for (auto [t, s] : {std::pair{6.0, 0.5}, {3.0, 3.0}, {2.0 * std::numbers::pi, 0.0}}) {
      EXPECT_LE(spectral_invariance_gap(rs, rl, t, s), 1e-10);
    }
  }
}

TEST(Invariance, CouplingBreaksInvariance) {
  WaveParams p = wave_k3_params();
  p.f = {};
  p.eta = 0.1;
  p.k = 1;
  const WaveSystem ws = build_wave_model(p);
  p.k = 3;
  p.coupling = Matrix{{1.0, 0.3, 0.0}, {0.3, 1.0, 0.3}, {0.0, 0.3, 1.0}};
  const WaveSystem wl = build_wave_model(p);
  EXPECT_GT(spectral_invariance_gap(ws, wl, 4.0, 0.0, 512), 1e-3);
}

TEST(Nondegeneracy, SlopeBetweenEigenvalues) {
  for (double f_inf : {2.5, -2.5, 0.0}) {
    const WaveSystem w = build_wave_model(affine_params(f_inf));
    const NondegeneracyReport r = linear_nondegeneracy(w, {0.1, 0.5, 1.0}, 1024);
    EXPECT_TRUE(r.kernel_trivial);
    EXPECT_TRUE(r.nondegenerate) << f_inf;
    for (const auto& row : r.rows) EXPECT_GT(row.distance_to_one, 1e-8);
  }
}

TEST(Nondegeneracy, ResonantSlopeHasKernel) {
  WaveParams p = affine_params(-4.0);
  p.check_resonance = false;
  const WaveSystem w = build_wave_model(p);
  const NondegeneracyReport r = linear_nondegeneracy(w, {0.5, 1.0}, 1024);
  EXPECT_FALSE(r.kernel_trivial);
  EXPECT_FALSE(r.nondegenerate);
  for (const auto& row : r.rows) EXPECT_LT(row.distance_to_one, 1e-8);
}

TEST(PeriodicWave, AffineMatchesDiscreteLinearAlgebra) {
  const WaveSystem w = build_wave_model(affine_params(2.5));
  PeriodicOptions opt;
  opt.n = 1024;
  opt.mild.grid = 512;
  const double lambda = 0.7;
  const PeriodicWave pw = find_periodic_wave(w, lambda, Vector::Zero(6), opt);
  EXPECT_LE(pw.residual, 1e-6);

  // Trapezoid recurrence for w_i = lambda (B z_i + g_i):
  // (I - hl/2 B) z_{i+1} = T_i (I + hl/2 B) z_i + hl/2 (T_i g_i + g_{i+1}).
  const Matrix b = asymptotic_linearization(w.model);
  const TranslationOperator phi(w.family, w.field, lambda, opt.n, opt.mild);
  const Propagator& prop = phi.propagator();
  const TimeGrid& grid = prop.grid();
  const double hl = 0.5 * grid.step() * lambda;
  const Matrix id = Matrix::Identity(6, 6);
  const auto lhs = (id - hl * b).partialPivLu();
  Matrix k = id;
  Vector c = Vector::Zero(6);
  for (int i = 0; i < grid.intervals; ++i) {
    const Vector gi = w.model.field(grid.at(i), Vector::Zero(6));
    const Vector gn = w.model.field(grid.at(i + 1), Vector::Zero(6));
    const Matrix step = lhs.solve(prop.transfer(i) * (id + hl * b));
    c = step * c + lhs.solve(hl * (prop.transfer(i) * gi + gn));
    k = step * k;
  }
  const Vector x_star = (id - k).partialPivLu().solve(c);
  EXPECT_LE((pw.x - x_star).norm(), 1e-8);

  // Continuous problem by RK4 shooting, a looser check of the same point.
  auto rhs = [&](double t, const Vector& z) { return Vector(lambda * (w.model.generator(t) * z + w.model.field(t, z))); };
  const double period = w.model.period();
  const Vector c_ode = oracle::rk4(rhs, Vector::Zero(6), 0.0, period, 8000);
  Matrix m(6, 6);
  for (int j = 0; j < 6; ++j) m.col(j) = oracle::rk4(rhs, Vector::Unit(6, j), 0.0, period, 8000) - c_ode;
  const Vector x_ode = (id - m).partialPivLu().solve(c_ode);
  EXPECT_LE((pw.x - x_ode).norm(), 1e-3);
}

TEST(PeriodicWave, SaturatingNonlinearity) {
  const WaveSystem w = build_wave_model(wave_k3_params());
  const PeriodicWave pw = find_periodic_wave(w, 1.0, Vector::Zero(6));
  EXPECT_LE(pw.residual, 1e-6);
  auto rhs = [&](double t, const Vector& z) { return Vector(w.model.generator(t) * z + w.model.field(t, z)); };
  const Vector end = oracle::rk4(rhs, pw.x, 0.0, w.model.period(), 8000);
  EXPECT_LE((end - pw.x).norm(), 1e-3);
  EXPECT_EQ(kind_of([&] { find_periodic_wave(w, 1.0, Vector::Zero(4)); }), ErrorKind::kDimensionMismatch);
}

}  // namespace
}  // namespace evolver

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "evolver/catalog.hpp"
#include "evolver/evolsys.hpp"
#include "evolver/random.hpp"
#include "evolver/wave.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace evolver {
namespace {

using testing::kind_of;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Matrix damped_rotation() {
  Matrix m(2, 2);
  m << -0.5, 1.0, -1.0, -0.3;
  return m;
}

GeneratorFamily scalar_sine_family() {
  GeneratorFamily f;
  f.dim = 1;
  f.period = 1.0;
  f.generator = [](double t) { return Matrix::Constant(1, 1, -(2.0 + std::sin(kTwoPi * t))); };
  f.omega = 1.0;
  return f;
}

// exp(-int_s^t (2 + sin(2 pi tau)) dtau)
double scalar_sine_exact(double t, double s) {
  return std::exp(-(2.0 * (t - s) + (std::cos(kTwoPi * s) - std::cos(kTwoPi * t)) / kTwoPi));
}

TEST(EvolutionSystem, ConstantFamilyCollapsesToExponential) {
  const GeneratorFamily f = constant_family(damped_rotation(), 1.0);
  for (int n : {1, 7, 64}) {
    const EvolutionSystem r(f, n);
    for (auto [t, s] : {std::pair{0.9, 0.13}, {1.0, 0.0}, {0.5, 0.5}, {0.77, 0.31}}) {
      EXPECT_LE((r(t, s) - oracle::series_exp(damped_rotation(), t - s)).norm(), 1e-12) << n;
    }
  }
}

TEST(EvolutionSystem, ScalarFamilyConvergesAtFirstOrder) {
  const GeneratorFamily f = scalar_sine_family();
  double previous = 0.0;
  for (int n : {256, 512, 1024}) {
    const EvolutionSystem r(f, n);
    double worst = 0.0;
    for (auto [t, s] : {std::pair{1.0, 0.0}, {0.8, 0.1}, {0.55, 0.3}}) {
      worst = std::max(worst, std::abs(r(t, s)(0, 0) - scalar_sine_exact(t, s)));
    }
    if (n == 1024) EXPECT_LT(worst, 1e-3);
    if (previous > 0.0) EXPECT_NEAR(worst / previous, 0.5, 0.15);
    previous = worst;
  }
}

TEST(EvolutionSystem, TwoModeWaveMatchesRk4) {
  WaveParams p = wave_k3_params();
  p.k = 2;
  p.f = {};
  const WaveSystem w = build_wave_model(p);
  const EvolutionSystem r(w.family, 4096);
  const Matrix ref = oracle::rk4_fundamental(w.family.generator, 0.0, w.family.period,
                                             static_cast<int>(std::round(w.family.period / 1e-4)));
  EXPECT_LT((r.monodromy() - ref).norm(), 1e-3);
  const Matrix ref_mid = oracle::rk4_fundamental(w.family.generator, 1.0, 4.0, 30000);
  EXPECT_LT((r(4.0, 1.0) - ref_mid).norm(), 1e-3);
}

TEST(EvolutionSystem, IdentityOnTheDiagonal) {
  const EvolutionSystem r(rotation_damped_2d().family, 64);
  const Vector x{{0.3, -1.2}};
  for (double t : {0.0, 1.0 / 64, 0.5, 0.7131, 1.0}) {
    EXPECT_EQ((r(t, t) - Matrix::Identity(2, 2)).norm(), 0.0);
    EXPECT_EQ((r.apply(t, t, x) - x).norm(), 0.0);
  }
}

TEST(EvolutionSystem, ApplyMatchesMatrix) {
  const EvolutionSystem r(rotation_damped_2d().family, 100);
  Rng rng(2);
  for (int i = 0; i < 30; ++i) {
    double s = rng.unit();
    double t = rng.unit();
    if (t < s) std::swap(t, s);
    if (i % 3 == 0) s = 0.0;
    const Vector x = rng.vector(2);
    EXPECT_LE((r.apply(t, s, x) - r(t, s) * x).norm(), 1e-13);
    EXPECT_LE((evolution_apply(r, t, s, x) - r(t, s) * x).norm(), 1e-13);
  }
}

TEST(EvolutionSystem, Errors) {
  const GeneratorFamily f = rotation_damped_2d().family;
  EXPECT_EQ(kind_of([&] { EvolutionSystem r(f, EvolutionSystem::kMaxSubdivisions + 1); }),
            ErrorKind::kResourceGuard);
  EXPECT_EQ(kind_of([&] { EvolutionSystem r(f, 0); }), ErrorKind::kInvalidInput);
  const EvolutionSystem r(f, 16);
  EXPECT_EQ(kind_of([&] { r(0.2, 0.5); }), ErrorKind::kOrdering);
  EXPECT_EQ(kind_of([&] { cocycle_defect(r, 0.5, 0.6, 0.1); }), ErrorKind::kOrdering);
}

TEST(Cocycle, ExactOnGridTriples) {
  const EvolutionSystem r(rotation_damped_2d().family, 64);
  for (int a = 0; a <= 64; a += 8)
    for (int b = 0; b <= a; b += 4)
      for (int c = 0; c <= b; c += 4) {
        EXPECT_LE(cocycle_defect(r, r.node(a), r.node(b), r.node(c)), 1e-12);
        const Vector x{{1.0, 0.5}};
        EXPECT_LE((r.apply(r.node(a), r.node(c), x) - r.apply(r.node(a), r.node(b), r.apply(r.node(b), r.node(c), x)))
                      .norm(),
                  1e-12);
      }
}

TEST(Cocycle, OffGridTriplesAndConstantFamily) {
  const EvolutionSystem r(rotation_damped_2d().family, 256);
  EXPECT_LE(cocycle_defect(r, 0.913, 0.4567, 0.0123), 1e-12);
  const EvolutionSystem c(constant_family(damped_rotation(), 1.0), 5);
  EXPECT_LE(cocycle_defect(c, 0.99, 0.41, 0.07), 1e-12);
}

TEST(Contraction, ExcessWithinTolerance) {
  const GeneratorFamily f = constant_family(-Matrix::Identity(2, 2), 1.0);
  EXPECT_LE(contraction_check(EvolutionSystem(f, 32), 1.0), 1e-12);
  const GeneratorFamily rot = rotation_damped_2d().family;
  EXPECT_LE(contraction_check(EvolutionSystem(rot, 512), rot.omega, 21), 1e-9);
  // A claimed rate above the true one shows up as positive excess.
  EXPECT_GT(contraction_check(EvolutionSystem(f, 32), 1.5), 0.1);
}

TEST(Validate, Hypotheses) {
  EXPECT_TRUE(validate(rotation_damped_2d().family).ok());
  GeneratorFamily broken = scalar_sine_family();
  broken.generator = [](double t) { return Matrix::Constant(1, 1, -1.0 - t); };
  EXPECT_FALSE(validate(broken).ok());
  EXPECT_EQ(kind_of([&] { require_valid(broken); }), ErrorKind::kPrecondition);
  GeneratorFamily optimistic = scalar_sine_family();
  optimistic.omega = 1.5;
  const FamilyReport rep = validate(optimistic);
  EXPECT_FALSE(rep.ok());
  EXPECT_NEAR(rep.min_rate, 1.0, 1e-3);
}

TEST(Families, ScaledAndPerturbed) {
  const GeneratorFamily f = scalar_sine_family();
  const GeneratorFamily s = scaled(f, 0.5);
  EXPECT_DOUBLE_EQ(s.at(0.25)(0, 0), -1.5);
  EXPECT_DOUBLE_EQ(s.omega, 0.5);
  const GeneratorFamily p = perturbed(f, [](double) { return Matrix::Constant(1, 1, 0.25); });
  EXPECT_DOUBLE_EQ(p.at(0.0)(0, 0), -1.75);
  EXPECT_NEAR(p.omega, 0.75, 1e-3);
}

TEST(Continuity, IdenticalFamiliesHaveNoGap) {
  const GeneratorFamily f = rotation_damped_2d().family;
  const ContinuityGap gap = family_continuity_gap(f, f, 256, Vector{{1.0, 0.0}});
  EXPECT_LE(gap.lhs, 1e-12);
  EXPECT_LE(gap.rhs, 1e-12);
}

TEST(Continuity, BoundHoldsAndScalesLinearly) {
  const GeneratorFamily f = rotation_damped_2d().family;
  const Vector v{{0.6, -0.8}};
  std::vector<double> lhs;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const GeneratorFamily g = perturbed(f, [eps](double) { return Matrix(eps * Matrix::Identity(2, 2)); });
    const ContinuityGap gap = family_continuity_gap(f, g, 512, v);
    EXPECT_LE(gap.lhs, gap.rhs);
    lhs.push_back(gap.lhs);
  }
  for (std::size_t i = 1; i < lhs.size(); ++i) {
    const double ratio = lhs[i - 1] / lhs[i];
    EXPECT_GT(ratio, 10.0 / 3.0);
    EXPECT_LT(ratio, 30.0);
  }
}

TEST(Continuity, WaveDampingPerturbation) {
  WaveParams p = wave_k3_params();
  p.f = {};
  const WaveSystem w = build_wave_model(p);
  for (double eps : {1e-2, 1e-3}) {
    WaveParams q = p;
    q.beta = [eps, b = p.beta](double t) { return b(t) + eps * std::cos(t); };
    q.eta = w.eta.eta;
    const WaveSystem wq = build_wave_model(q);
    const ContinuityGap gap = family_continuity_gap(w.family, wq.family, 1024, Vector::Ones(6));
    EXPECT_LE(gap.lhs, gap.rhs);
    EXPECT_GT(gap.lhs, 0.0);
  }
}

}  // namespace
}  // namespace evolver

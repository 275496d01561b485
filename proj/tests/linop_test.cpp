#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "evolver/error.hpp"
#include "evolver/linop.hpp"
#include "evolver/random.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace evolver {
namespace {

using testing::kind_of;

TEST(MatExp, ZeroGivesIdentity) {
  EXPECT_TRUE(mat_exp(Matrix::Zero(3, 3), 5.0).isApprox(Matrix::Identity(3, 3)));
  EXPECT_EQ((mat_exp(Matrix::Zero(4, 4), 5.0) - Matrix::Identity(4, 4)).norm(), 0.0);
}

TEST(MatExp, QuarterRotation) {
  Matrix j(2, 2);
  j << 0, -1, 1, 0;
  Matrix expected(2, 2);
  expected << 0, -1, 1, 0;
  EXPECT_LE((mat_exp(j, std::numbers::pi / 2) - expected).norm(), 1e-14);
}

TEST(MatExp, MatchesTaylorSeries) {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = rng.uniform_int(1, 6);
    Matrix m = rng.matrix(d, d);
    m *= rng.uniform(0.1, 4.0) / oracle::svd_norm(m);
    const double t = rng.uniform(0.0, 1.0);
    const Matrix ref = oracle::series_exp(m, t);
    EXPECT_LE((mat_exp(m, t) - ref).norm(), 1e-12 * std::max(1.0, ref.norm())) << "trial " << trial;
  }
}

TEST(MatExp, LargeNormUsesSquaring) {
  Matrix m(2, 2);
  m << -50, 20, 0, -30;
  // Upper triangular: closed form.
  Matrix ref(2, 2);
  ref << std::exp(-50.0), 20 * (std::exp(-50.0) - std::exp(-30.0)) / (-50.0 + 30.0), 0, std::exp(-30.0);
  EXPECT_LE((mat_exp(m) - ref).norm(), 1e-12 * ref.norm());
}

TEST(MatExp, SemigroupLaw) {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = rng.uniform_int(1, 5);
    Matrix m = rng.matrix(d, d);
    m *= rng.uniform(0.0, 4.0) / oracle::svd_norm(m);
    const double s = rng.uniform(0.0, 2.0);
    const double t = rng.uniform(0.0, 2.0);
    const double nm = oracle::svd_norm(m);
    EXPECT_LE((mat_exp(m, s + t) - mat_exp(m, s) * mat_exp(m, t)).norm(),
              1e-10 * (1 + nm) * (1 + nm) * std::exp(nm * (s + t)));
  }
}

TEST(MatExp, DissipativeGeneratorGivesContraction) {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = rng.uniform_int(1, 6);
    const Matrix b = rng.matrix(d, d);
    const Matrix c = rng.matrix(d, d);
    const Matrix a = -b.transpose() * b + (c - c.transpose());
    EXPECT_LE(oracle::svd_norm(mat_exp(a, rng.uniform(0.0, 3.0))), 1.0 + 1e-12);
  }
}

TEST(MatExp, RejectsBadInput) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(kind_of([&] { mat_exp(m); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { mat_exp(Matrix::Zero(2, 3)); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { mat_exp(Matrix::Zero(kMaxDim + 1, kMaxDim + 1)); }), ErrorKind::kResourceGuard);
}

TEST(OperatorNorm, Examples) {
  EXPECT_NEAR(operator_norm(Matrix::Identity(3, 3)), 1.0, 1e-15);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.5;
  d(1, 1) = -2.0;
  EXPECT_NEAR(operator_norm(d), 2.0, 1e-15);
  EXPECT_EQ(operator_norm(Matrix::Zero(3, 3)), 0.0);
}

TEST(OperatorNorm, MatchesSvd) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = rng.uniform_int(1, 8);
    const Matrix m = rng.matrix(d, d, -3, 3);
    EXPECT_NEAR(operator_norm(m), oracle::svd_norm(m), 1e-9 * oracle::svd_norm(m));
  }
}

TEST(OperatorNorm, BoundsEveryVector) {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = rng.uniform_int(1, 6);
    const Matrix m = rng.matrix(d, d);
    const Vector x = rng.vector(d);
    EXPECT_LE((m * x).norm(), operator_norm(m) * x.norm() * (1 + 1e-12));
  }
}

TEST(OperatorNorm, MetricNormIsCongruentEuclideanNorm) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = rng.uniform_int(1, 5);
    const Matrix b = rng.matrix(d, d);
    const Matrix g = b.transpose() * b + Matrix::Identity(d, d);
    const Matrix m = rng.matrix(d, d);
    const Matrix l = g.llt().matrixU();  // g = l^T l
    const double ref = oracle::svd_norm(l * m * l.inverse());
    EXPECT_NEAR(operator_norm(m, g), ref, 1e-9 * (1 + ref));
    const Vector x = rng.vector(d);
    EXPECT_NEAR(metric_norm(x, g), std::sqrt(x.dot(g * x)), 1e-12);
  }
}

TEST(OperatorNorm, RejectsNonSpdMetric) {
  Matrix g = Matrix::Identity(2, 2);
  g(1, 1) = -1.0;
  EXPECT_EQ(kind_of([&] { operator_norm(Matrix::Identity(2, 2), g); }), ErrorKind::kInvalidMetric);
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.5;
  EXPECT_EQ(kind_of([&] { require_spd(asym); }), ErrorKind::kInvalidMetric);
}

TEST(Resolvent, Examples) {
  EXPECT_TRUE(resolvent(Matrix::Zero(3, 3), 1.0).isApprox(Matrix::Identity(3, 3)));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = -1.0;
  d(1, 1) = -2.0;
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  expected(1, 1) = 0.5;
  EXPECT_LE((resolvent(d, 0.0) - expected).norm(), 1e-15);
}

TEST(Resolvent, ResidualAndResolventIdentity) {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = rng.uniform_int(1, 6);
    const Matrix a = rng.matrix(d, d) - 8.0 * Matrix::Identity(d, d);
    const double mu = rng.uniform(0.0, 2.0);
    const double nu = rng.uniform(0.0, 2.0);
    const Matrix r_mu = resolvent(a, mu);
    const Matrix r_nu = resolvent(a, nu);
    const Matrix id = Matrix::Identity(d, d);
    EXPECT_LE(((mu * id - a) * r_mu - id).norm(), 1e-12 * (1 + r_mu.norm()));
    EXPECT_LE((r_mu - r_nu - (nu - mu) * r_mu * r_nu).norm(), 1e-10 * (1 + r_mu.norm() * r_nu.norm()));
  }
}

TEST(Resolvent, SingularPoint) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = -1.0;
  EXPECT_EQ(kind_of([&] { resolvent(a, 1.0); }), ErrorKind::kSingularResolvent);
}

}  // namespace
}  // namespace evolver

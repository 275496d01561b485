#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "evolver/degree.hpp"
#include "evolver/random.hpp"
#include "test_util.hpp"

namespace evolver {
namespace {

using testing::kind_of;
using testing::message_of;

VectorField identity() {
  return [](const Vector& x) { return x; };
}
VectorField antipodal() {
  return [](const Vector& x) { return Vector(-x); };
}

// z^m - c on the plane.
VectorField complex_power(int m, double c) {
  return [m, c](const Vector& x) {
    const std::complex<double> w = std::pow(std::complex<double>(x(0), x(1)), m) - c;
    return Vector{{w.real(), w.imag()}};
  };
}

Region unit_ball(int d) { return Region::ball(Vector::Zero(d), 1.0); }

TEST(Region, Geometry) {
  const Region b = unit_ball(2);
  EXPECT_TRUE(b.contains(Vector{{0.5, 0.5}}));
  EXPECT_FALSE(b.contains(Vector{{1.0, 0.0}}));
  EXPECT_NEAR(b.boundary_point(0.25)(1), 1.0, 1e-15);
  const Region box = Region::box(Vector{{-1.0, 0.0}}, Vector{{1.0, 2.0}});
  EXPECT_TRUE(box.contains(Vector{{0.0, 1.0}}));
  EXPECT_FALSE(box.contains(Vector{{0.0, 2.0}}));
  for (const auto& x : box.boundary_samples(32)) {
    const bool on_edge = std::abs(std::abs(x(0)) - 1.0) < 1e-12 || std::abs(x(1)) < 1e-12 ||
                         std::abs(x(1) - 2.0) < 1e-12;
    EXPECT_TRUE(on_edge);
  }
  for (int d = 3; d <= 4; ++d) {
    for (const auto& x : unit_ball(d).boundary_samples(64)) EXPECT_NEAR(x.norm(), 1.0, 1e-12);
  }
  EXPECT_EQ(kind_of([] { Region::ball(Vector::Zero(2), -1.0); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { Region::box(Vector::Zero(2), Vector::Zero(2)); }), ErrorKind::kInvalidInput);
}

TEST(Degree, IdentityIsOneInEveryDimension) {
  for (int d = 1; d <= 4; ++d) {
    DegreeOptions opt;
    opt.grid = d == 4 ? 6 : 10;
    opt.boundary_resolution = d >= 3 ? 64 : 256;
    EXPECT_EQ(brouwer_degree(identity(), unit_ball(d), opt), 1) << d;
    EXPECT_EQ(brouwer_degree(identity(), Region::box(-Vector::Ones(d), Vector::Ones(d)), opt), 1) << d;
  }
}

TEST(Degree, AntipodalMapSign) {
  for (int d = 1; d <= 4; ++d) {
    DegreeOptions opt;
    opt.grid = d == 4 ? 6 : 10;
    opt.boundary_resolution = d >= 3 ? 64 : 256;
    EXPECT_EQ(brouwer_degree(antipodal(), unit_ball(d), opt), d % 2 == 0 ? 1 : -1) << d;
  }
}

TEST(Degree, ComplexPowers) {
  for (int m = 1; m <= 4; ++m) {
    const DegreeResult r = brouwer_degree_detailed(complex_power(m, 0.25), unit_ball(2));
    EXPECT_EQ(r.degree, m);
    EXPECT_EQ(static_cast<int>(r.zeros.size()), m);
    EXPECT_EQ(winding_number_2d(complex_power(m, 0.25), unit_ball(2)), m);
    for (std::size_t i = 1; i < r.zeros.size(); ++i) {
      const Vector& a = r.zeros[i - 1].point;
      const Vector& b = r.zeros[i].point;
      EXPECT_TRUE(a(0) < b(0) || (a(0) == b(0) && a(1) <= b(1)));
    }
  }
}

TEST(Degree, DegenerateZeroIsReported) {
  EXPECT_EQ(kind_of([] { brouwer_degree(complex_power(2, 0.0), unit_ball(2)); }), ErrorKind::kDegenerateZero);
  // The boundary oracle still sees the multiplicity.
  EXPECT_EQ(winding_number_2d(complex_power(2, 0.0), unit_ball(2)), 2);
}

TEST(Degree, ConjugateHasNegativeDegree) {
  const VectorField conj = [](const Vector& x) {
    const std::complex<double> w = std::pow(std::complex<double>(x(0), -x(1)), 3) - 0.25;
    return Vector{{w.real(), w.imag()}};
  };
  EXPECT_EQ(brouwer_degree(conj, unit_ball(2)), -3);
  EXPECT_EQ(winding_number_2d(conj, unit_ball(2)), -3);
}

TEST(Degree, NoZerosGivesZero) {
  const VectorField shifted = [](const Vector& x) { return Vector(x - Vector::Constant(x.size(), 5.0)); };
  EXPECT_EQ(brouwer_degree(shifted, unit_ball(2)), 0);
  EXPECT_EQ(winding_number_2d(shifted, unit_ball(2)), 0);
}

TEST(Degree, AdditivityOverSubregions) {
  // g(x, y) = (x^2 - 1, y): zeros at (+-1, 0) with opposite signs.
  const VectorField g = [](const Vector& x) { return Vector{{x(0) * x(0) - 1.0, x(1)}}; };
  const Region whole = Region::box(Vector{{-2.0, -1.0}}, Vector{{2.0, 1.0}});
  const Region left = Region::box(Vector{{-2.0, -1.0}}, Vector{{0.0, 1.0}});
  const Region right = Region::box(Vector{{0.0, -1.0}}, Vector{{2.0, 1.0}});
  const int dl = brouwer_degree(g, left);
  const int dr = brouwer_degree(g, right);
  EXPECT_EQ(dl, -1);
  EXPECT_EQ(dr, 1);
  EXPECT_EQ(brouwer_degree(g, whole), dl + dr);
  EXPECT_EQ(winding_number_2d(g, whole), 0);
  EXPECT_EQ(winding_number_2d(g, left), -1);
}

TEST(Degree, ExcisionOfZeroFreeArea) {
  const VectorField g = complex_power(2, 0.25);
  EXPECT_EQ(brouwer_degree(g, unit_ball(2)), brouwer_degree(g, Region::ball(Vector::Zero(2), 0.8)));
}

TEST(Degree, HomotopyInvariance) {
  const double angle = 2.5;
  const Matrix rot{{std::cos(angle), -std::sin(angle)}, {std::sin(angle), std::cos(angle)}};
  for (double s = 0.0; s <= 1.0; s += 0.125) {
    const VectorField h = [rot, s](const Vector& x) { return Vector((1 - s) * x + s * rot * x); };
    EXPECT_EQ(brouwer_degree(h, unit_ball(2)), 1) << s;
    EXPECT_EQ(winding_number_2d(h, unit_ball(2)), 1) << s;
  }
}

TEST(Degree, RegularValueAgreesWithWindingOnLinearMaps) {
  Rng rng(17);
  int checked = 0;
  while (checked < 30) {
    const Matrix a = rng.matrix(2, 2, -2, 2);
    if (std::abs(a.determinant()) < 0.1) continue;
    const VectorField g = [a](const Vector& x) { return Vector(a * x); };
    const int deg = brouwer_degree(g, unit_ball(2));
    EXPECT_EQ(deg, a.determinant() > 0 ? 1 : -1);
    EXPECT_EQ(deg, winding_number_2d(g, unit_ball(2)));
    ++checked;
  }
}

TEST(Degree, BoundaryZeroIsInadmissible) {
  const Region shifted = Region::ball(Vector{{1.0, 0.0}}, 1.0);
  EXPECT_EQ(kind_of([&] { brouwer_degree(identity(), shifted); }), ErrorKind::kInadmissibleRegion);
  EXPECT_NE(message_of([&] { brouwer_degree(identity(), shifted); }).find("(0, "), std::string::npos);
  EXPECT_EQ(kind_of([&] { winding_number_2d(identity(), shifted); }), ErrorKind::kInadmissibleRegion);
}

TEST(Degree, DimensionCap) {
  EXPECT_EQ(kind_of([] { brouwer_degree(identity(), unit_ball(5)); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { winding_number_2d(identity(), unit_ball(3)); }), ErrorKind::kInvalidInput);
}

TEST(Winding, OracleFailureOnRunawayRefinement) {
  // Angle K theta with K = 0b1010...10: every dyadic step up to 2^22 turns by
  // at least 2 pi / 3, so refinement never stops.
  const double k = 2796202.0;
  const VectorField spin = [k](const Vector& x) {
    const double theta = std::atan2(x(1), x(0));
    return Vector{{std::cos(k * theta), std::sin(k * theta)}};
  };
  EXPECT_EQ(kind_of([&] { winding_number_2d(spin, unit_ball(2)); }), ErrorKind::kOracleFailure);
  EXPECT_EQ(kind_of([] { winding_number_2d(identity(), unit_ball(2), (1 << 20) + 1); }), ErrorKind::kOracleFailure);
}

TEST(DegHat, AveragedFields) {
  const Region u = unit_ball(2);
  const Matrix a{{-1.0, -2.0}, {2.0, -1.0}};
  const VectorField zero = [](const Vector& x) { return Vector(Vector::Zero(x.size())); };
  EXPECT_EQ(deg_hat(a, zero, u), 1);
  const Matrix b{{3.0, 0.0}, {0.0, 0.5}};
  const VectorField lin = [b](const Vector& x) { return Vector(b * x); };
  const Matrix id = Matrix::Identity(2, 2);
  const double det = (id + (-id).inverse() * b).determinant();
  EXPECT_EQ(deg_hat(-id, lin, u), det > 0 ? 1 : -1);
  const VectorField two = [](const Vector&) { return Vector::Constant(1, 2.0); };
  EXPECT_EQ(deg_hat(Matrix::Constant(1, 1, -1.0), two, Region::box(Vector::Zero(1), Vector::Constant(1, 4.0))), 1);
  EXPECT_EQ(kind_of([&] { deg_hat(Matrix::Zero(2, 2), zero, u); }), ErrorKind::kSingularResolvent);
}

}  // namespace
}  // namespace evolver

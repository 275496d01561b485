#pragma once

// Time averages of periodic generator families and fields, homotopies of
// the family toward -I, and the small-lambda experiments relating periodic
// points of Phi_T^(lambda) to zeros of the averaged field.

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evolver/degree.hpp"
#include "evolver/mild.hpp"

namespace evolver {

/// (A_hat, F_hat) with the Simpson panel counts that met the tolerance.
struct AveragedField {
  Matrix a_hat;
  VectorField f_hat;
  int generator_panels = 0;
  double tolerance = 1e-10;

  Vector operator()(const Vector& x) const { return a_hat * x + f_hat(x); }
};

/// (1/T) int_0^T A(t) dt by composite Simpson, doubling the panel count
/// until two successive values differ by less than `tol`.
Matrix average_generator(const GeneratorFamily& family, double tol = 1e-10, int* panels = nullptr);
/// (1/T) int_0^T F(t, x) dt, same rule.
Vector average_field(const NonlinearField& field, const Vector& x, double tol = 1e-10);
AveragedField average(const GeneratorFamily& family, const NonlinearField& field, double tol = 1e-10);

/// -mu I + (1 - mu) A(t); the rate becomes mu + (1 - mu) omega.
GeneratorFamily mu_rescale(const GeneratorFamily& family, double mu);

struct SweepOptions {
  int n = 1024;  ///< product-formula subdivisions
  MildOptions mild{512, 1e-12, 500};
  FixedPointOptions fixed_point{1e-10, 60, 5000, 1e-6};
};

struct BranchingRow {
  double lambda = 0.0;
  Vector x;                  ///< fixed point of Phi_T^(lambda); empty on failure
  double defect = 0.0;       ///< ||A_hat x + F_hat(x)||
  double residual = 0.0;     ///< ||Phi_T(x) - x||
  double sup_gap = 0.0;      ///< max_t ||u(t) - x_0|| along the periodic orbit
  int newton_iters = 0;
  int picard_iters = 0;      ///< sweeps of the final mild solve
  std::string status = "ok"; ///< error kind name when the fixed point failed
};

struct BranchingTable {
  std::vector<BranchingRow> rows;
  std::optional<Vector> averaged_zero;  ///< zero of A_hat x + F_hat(x) near the region
  bool monotone = false;                ///< defects nonincreasing along the sweep
  bool passed = false;                  ///< monotone and final <= 1e-2 initial (or both tiny)
};

/// Fixed points x_lambda of Phi_T^(lambda) for descending lambdas, each Newton
/// solve warm-started from the previous one (the region center first).
BranchingTable branching_experiment(const GeneratorFamily& family, const NonlinearField& field,
                                    const std::vector<double>& lambdas, const Region& region,
                                    const SweepOptions& options = {});

struct MonodromyReport {
  Matrix matrix;
  std::vector<std::complex<double>> eigenvalues;
  double distance_to_one = 0.0;  ///< min |mu - 1| over eigenvalues
  bool nondegenerate = false;    ///< distance_to_one > 1e-8
};

/// Fundamental matrix over [0, T] of u' = lambda (A(t) + F_inf(t)) u.
MonodromyReport monodromy(const GeneratorFamily& family, const std::function<Matrix(double)>& f_inf,
                          double lambda, int n = 4096);

struct AveragingRow {
  double lambda = 0.0;
  bool admissible = false;  ///< I - Phi_T^(lambda) nonvanishing on the boundary samples
  double boundary_min = 0.0;
  std::optional<int> degree;
  std::optional<int> winding;  ///< boundary winding number, d = 2 only
  std::string status = "ok";
};

struct AveragingReport {
  int averaged_degree = 0;                 ///< Deg(A_hat + F_hat, U)
  std::optional<int> averaged_winding;     ///< d = 2 only
  std::vector<AveragingRow> rows;
  std::optional<double> lambda0;           ///< largest lambda with every sampled lambda' <= lambda admissible
  bool consistent = false;                 ///< d_lambda = d_0 for every sampled lambda <= lambda0
};

struct AveragingOptions {
  SweepOptions sweep{512, {256, 1e-12, 500}, {}};
  DegreeOptions degree{6, 1e-6, 1e-6, 64, 60};
  int winding_samples = 128;
};

/// Throws inadmissible-region when A_hat x + F_hat(x) vanishes on a boundary sample.
AveragingReport averaging_degree_check(const GeneratorFamily& family, const NonlinearField& field,
                                       const Region& region, const std::vector<double>& lambdas,
                                       const AveragingOptions& options = {});

}  // namespace evolver

#pragma once

// Contraction semigroups at finite dimension and Chernoff-type product
// formulas: powers L(lambda, mu)^k and Riemann sums lambda * sum_k L^k that
// converge to the semigroup of the consistency-limit generator.

#include <functional>
#include <optional>
#include <vector>

#include "evolver/linop.hpp"

namespace evolver {

/// Largest omega with <x, M x>_G <= -omega <x, x>_G for all x, i.e. minus the
/// top generalized eigenvalue of (G M + M^T G)/2 against G. Negative when M
/// is not dissipative in the metric.
double dissipativity_rate(const Matrix& m, const Matrix& metric);
double dissipativity_rate(const Matrix& m);

/// exp(t A) with A dissipative at rate omega >= 0 in the metric G.
class ContractionSemigroup {
 public:
  /// Throws precondition if the generator is not dissipative (omega < -1e-12).
  explicit ContractionSemigroup(Matrix generator, std::optional<Matrix> metric = std::nullopt);

  const Matrix& generator() const { return generator_; }
  const Matrix& metric() const { return metric_; }
  double omega() const { return omega_; }

  Matrix at(double t) const { return mat_exp(generator_, t); }

 private:
  Matrix generator_;
  Matrix metric_;
  double omega_;
};

struct DefectBound {
  double lhs;  ///< ||exp(n(T - I)) x - T^n x||
  double rhs;  ///< sqrt(n) ||x - T x||
};

/// Both sides of the sqrt(n) estimate for a contraction T. Throws precondition
/// when ||T|| > 1 + 1e-12.
DefectBound chernoff_defect(const Matrix& contraction, const Vector& x, int n);

/// A contraction-valued scheme L(lambda, mu) together with the generator
/// family A^(mu) it is consistent with as lambda -> 0+.
struct ChernoffScheme {
  std::function<Matrix(double lambda, double mu)> step;
  std::function<Matrix(double mu)> limit_generator;
};

/// L(lambda, mu) = exp(lambda A^(mu)); reproduces the semigroup exactly.
ChernoffScheme exact_scheme(std::function<Matrix(double mu)> generator);
/// L(lambda, mu) = (I - lambda A^(mu))^{-1}, the implicit Euler scheme.
ChernoffScheme resolvent_scheme(std::function<Matrix(double mu)> generator);

enum class SequencePreset {
  kUniform,  ///< k_n = n, lambda_n = t / n
  kCeil,     ///< lambda_n = 1 / n, k_n = ceil(t / lambda_n)
};

/// Generated sequences (k_n, lambda_n, mu_n) with k_n lambda_n -> t and
/// mu_n = clamp(mu0 + mu_offset / n) -> mu0.
struct SequenceSpec {
  SequencePreset preset = SequencePreset::kUniform;
  double t = 1.0;
  double mu0 = 0.0;
  double mu_offset = 0.0;
  std::vector<int> ns = {64, 128, 256, 512, 1024, 2048, 4096};
};

struct SequenceTerm {
  int n;
  int k;
  double lambda;
  double mu;
};

std::vector<SequenceTerm> expand(const SequenceSpec& spec);

struct ConvergenceRow {
  SequenceTerm term;
  double error;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  /// Last error < 1e-3 and the last three errors nonincreasing.
  bool converged = false;
  /// Least-squares slope of -log(error) against log(n); reported, not asserted.
  double measured_rate = 0.0;
};

/// Rows ||L(lambda_n, mu_n)^{k_n} x - exp(t A^(mu0)) x||.
ConvergenceTable chernoff_power_limit(const ChernoffScheme& scheme, const SequenceSpec& seq,
                                      const Vector& x);

/// Rows ||lambda_n sum_{k<k_n} L^k x - int_0^t exp(tau A^(mu0)) x dtau||, the
/// integral by adaptive quadrature at 1e-12.
ConvergenceTable chernoff_sum_limit(const ChernoffScheme& scheme, const SequenceSpec& seq,
                                    const Vector& x);

/// int_0^t exp(tau A) x dtau by adaptive Simpson quadrature.
Vector semigroup_integral(const Matrix& generator, double t, const Vector& x, double tol = 1e-12);

}  // namespace evolver

#include "evolver/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "evolver/error.hpp"
#include "evolver/quadrature.hpp"

namespace evolver {

double dissipativity_rate(const Matrix& m, const Matrix& metric) {
  require_square(m, "generator");
  require_spd(metric);
  if (metric.rows() != m.rows()) fail(ErrorKind::kDimensionMismatch, "metric and generator differ in size");
  const Matrix gm = metric * m;
  const Matrix sym = 0.5 * (gm + gm.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(sym, metric, Eigen::EigenvaluesOnly);
  return -eig.eigenvalues().maxCoeff();
}

double dissipativity_rate(const Matrix& m) {
  require_square(m, "generator");
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return -eig.eigenvalues().maxCoeff();
}

ContractionSemigroup::ContractionSemigroup(Matrix generator, std::optional<Matrix> metric)
    : generator_(std::move(generator)) {
  require_square(generator_, "generator");
  metric_ = metric ? *metric : Matrix::Identity(generator_.rows(), generator_.cols());
  omega_ = dissipativity_rate(generator_, metric_);
  if (omega_ < -1e-12) {
    fail(ErrorKind::kPrecondition,
         "generator is not dissipative in the supplied metric (rate " + std::to_string(omega_) + ")");
  }
}

namespace {

void require_contraction(const Matrix& op, const char* what) {
  const double norm = operator_norm(op);
  if (norm > 1.0 + 1e-12) {
    fail(ErrorKind::kPrecondition,
         std::string(what) + " is not a contraction (norm " + std::to_string(norm) + ")");
  }
}

double fitted_rate(const std::vector<ConvergenceRow>& rows) {
  // Slope of -log(err) versus log(n) over the rows with a positive error.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (const auto& row : rows) {
    if (!(row.error > 0.0)) continue;
    const double x = std::log(static_cast<double>(row.term.n));
    const double y = -std::log(row.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return 0.0;
  const double denom = count * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (count * sxy - sx * sy) / denom;
}

void finish(ConvergenceTable& table) {
  const auto& rows = table.rows;
  const std::size_t m = rows.size();
  bool trend = m >= 3;
  if (trend) {
    trend = rows[m - 2].error <= rows[m - 3].error && rows[m - 1].error <= rows[m - 2].error;
  }
  // Exact schemes produce errors at roundoff; those count as converged.
  const bool all_tiny = std::all_of(rows.begin(), rows.end(),
                                    [](const ConvergenceRow& r) { return r.error <= 1e-12; });
  table.converged = m > 0 && rows.back().error < 1e-3 && (trend || all_tiny);
  table.measured_rate = fitted_rate(rows);
}

}  // namespace

DefectBound chernoff_defect(const Matrix& contraction, const Vector& x, int n) {
  require_square(contraction, "contraction");
  require_finite(x, "x");
  if (n < 0) fail(ErrorKind::kInvalidInput, "n must be nonnegative");
  require_contraction(contraction, "T");
  const Eigen::Index d = contraction.rows();
  const Matrix id = Matrix::Identity(d, d);
  const Vector lhs_exp = mat_exp(static_cast<double>(n) * (contraction - id), 1.0) * x;
  Vector power = x;
  for (int i = 0; i < n; ++i) power = contraction * power;
  return {(lhs_exp - power).norm(), std::sqrt(static_cast<double>(n)) * (x - contraction * x).norm()};
}

ChernoffScheme exact_scheme(std::function<Matrix(double mu)> generator) {
  ChernoffScheme scheme;
  scheme.step = [generator](double lambda, double mu) { return mat_exp(generator(mu), lambda); };
  scheme.limit_generator = std::move(generator);
  return scheme;
}

ChernoffScheme resolvent_scheme(std::function<Matrix(double mu)> generator) {
  ChernoffScheme scheme;
  scheme.step = [generator](double lambda, double mu) {
    // (I - lambda A)^{-1} = lambda^{-1} R(1/lambda; A)
    return Matrix(resolvent(generator(mu), 1.0 / lambda) / lambda);
  };
  scheme.limit_generator = std::move(generator);
  return scheme;
}

std::vector<SequenceTerm> expand(const SequenceSpec& spec) {
  if (!(spec.t >= 0.0)) fail(ErrorKind::kInvalidInput, "sequence time must be nonnegative");
  if (spec.mu0 < 0.0 || spec.mu0 > 1.0) fail(ErrorKind::kInvalidInput, "mu0 must lie in [0, 1]");
  std::vector<SequenceTerm> terms;
  for (int n : spec.ns) {
    if (n < 1) fail(ErrorKind::kInvalidInput, "sequence indices must be positive");
    SequenceTerm term{};
    term.n = n;
    if (spec.preset == SequencePreset::kUniform) {
      term.k = n;
      term.lambda = spec.t / n;
    } else {
      term.lambda = 1.0 / n;
      term.k = static_cast<int>(std::ceil(spec.t * n - 1e-12));
    }
    if (term.lambda <= 0.0) term.lambda = 1.0 / n;
    term.mu = std::clamp(spec.mu0 + spec.mu_offset / n, 0.0, 1.0);
    terms.push_back(term);
  }
  return terms;
}

ConvergenceTable chernoff_power_limit(const ChernoffScheme& scheme, const SequenceSpec& seq,
                                      const Vector& x) {
  require_finite(x, "x");
  const Vector target = mat_exp(scheme.limit_generator(seq.mu0), seq.t) * x;
  ConvergenceTable table;
  for (const auto& term : expand(seq)) {
    const Matrix step = scheme.step(term.lambda, term.mu);
    require_contraction(step, "L(lambda, mu)");
    Vector y = x;
    for (int i = 0; i < term.k; ++i) y = step * y;
    table.rows.push_back({term, (y - target).norm()});
  }
  finish(table);
  return table;
}

Vector semigroup_integral(const Matrix& generator, double t, const Vector& x, double tol) {
  if (t == 0.0 || x.isZero(0.0)) return Vector::Zero(x.size());
  return adaptive_simpson<Vector>([&](double tau) { return Vector(mat_exp(generator, tau) * x); },
                                  0.0, t, tol);
}

ConvergenceTable chernoff_sum_limit(const ChernoffScheme& scheme, const SequenceSpec& seq,
                                    const Vector& x) {
  require_finite(x, "x");
  const Vector target = semigroup_integral(scheme.limit_generator(seq.mu0), seq.t, x);
  ConvergenceTable table;
  for (const auto& term : expand(seq)) {
    const Matrix step = scheme.step(term.lambda, term.mu);
    require_contraction(step, "L(lambda, mu)");
    Vector power = x;
    Vector sum = Vector::Zero(x.size());
    for (int i = 0; i < term.k; ++i) {
      sum += power;
      power = step * power;
    }
    table.rows.push_back({term, (term.lambda * sum - target).norm()});
  }
  finish(table);
  return table;
}

}  // namespace evolver

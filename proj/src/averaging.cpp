#include "evolver/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "evolver/error.hpp"
#include "evolver/quadrature.hpp"

namespace evolver {

namespace {

constexpr int kMaxPanels = 1 << 16;

template <typename Value, typename Fn>
Value composite_simpson(const Fn& f, double period, int panels) {
  const double h = period / panels;
  Value sum = f(0.0) + f(period);
  for (int i = 1; i < panels; ++i) sum = sum + (i % 2 ? 4.0 : 2.0) * f(h * i);
  return Value((h / 3.0) * sum);
}

template <typename Value, typename Fn>
Value simpson_average(const Fn& f, double period, double tol, int* panels_out) {
  int panels = 8;
  Value prev = composite_simpson<Value>(f, period, panels);
  while (panels < kMaxPanels) {
    panels *= 2;
    Value next = composite_simpson<Value>(f, period, panels);
    const bool done = detail::max_abs(Value(next - prev)) < tol * period;
    prev = std::move(next);
    if (done) break;
  }
  if (panels_out) *panels_out = panels;
  return Value(prev / period);
}

}  // namespace

Matrix average_generator(const GeneratorFamily& family, double tol, int* panels) {
  if (!family.generator || !(family.period > 0.0)) fail(ErrorKind::kInvalidInput, "generator family is incomplete");
  return simpson_average<Matrix>([&](double t) { return family.at(t); }, family.period, tol, panels);
}

Vector average_field(const NonlinearField& field, const Vector& x, double tol) {
  if (x.size() != field.dim) fail(ErrorKind::kDimensionMismatch, "state and field dimensions differ");
  return simpson_average<Vector>([&](double t) { return field(t, x); }, field.period, tol, nullptr);
}

AveragedField average(const GeneratorFamily& family, const NonlinearField& field, double tol) {
  if (family.dim != field.dim) fail(ErrorKind::kDimensionMismatch, "family and field dimensions differ");
  AveragedField avg;
  avg.a_hat = average_generator(family, tol, &avg.generator_panels);
  avg.tolerance = tol;
  avg.f_hat = [field, tol](const Vector& x) { return average_field(field, x, tol); };
  return avg;
}

GeneratorFamily mu_rescale(const GeneratorFamily& family, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) fail(ErrorKind::kInvalidInput, "mu must lie in [0, 1]");
  if (mu == 0.0) return family;
  GeneratorFamily out = family;
  auto inner = family.generator;
  const Eigen::Index d = family.dim;
  out.generator = [inner, mu, d](double t) {
    return Matrix(-mu * Matrix::Identity(d, d) + (1.0 - mu) * inner(t));
  };
  out.omega = mu + (1.0 - mu) * family.omega;
  out.differentiable = family.differentiable || mu == 1.0;
  return out;
}

BranchingTable branching_experiment(const GeneratorFamily& family, const NonlinearField& field,
                                    const std::vector<double>& lambdas, const Region& region,
                                    const SweepOptions& options) {
  if (lambdas.empty()) fail(ErrorKind::kInvalidInput, "lambda sweep is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || (i > 0 && !(lambdas[i] < lambdas[i - 1]))) {
      fail(ErrorKind::kInvalidInput, "lambdas must be positive and strictly descending");
    }
  }
  if (region.dim() != family.dim) fail(ErrorKind::kDimensionMismatch, "region and family dimensions differ");
  const AveragedField avg = average(family, field);

  BranchingTable table;
  try {
    const auto shifted = [&avg](const Vector& x) { return Vector(x + avg(x)); };
    table.averaged_zero = fixed_point(shifted, region.center(), FixedPointMethod::kNewton, options.fixed_point).point;
  } catch (const Error&) {
    table.averaged_zero.reset();
  }

  Vector guess = region.center();
  bool all_ok = true;
  for (double lambda : lambdas) {
    BranchingRow row;
    row.lambda = lambda;
    try {
      const TranslationOperator phi(family, field, lambda, options.n, options.mild);
      // Phi_lambda - I is O(lambda), so the residual target shrinks with it.
      FixedPointOptions fpo = options.fixed_point;
      fpo.tol *= std::min(1.0, lambda);
      const FixedPointResult fp = fixed_point(phi, guess, FixedPointMethod::kNewton, fpo);
      const Trajectory traj = phi.trajectory(fp.point);
      row.x = fp.point;
      row.residual = (traj.final_state() - fp.point).norm();
      row.newton_iters = fp.iterations;
      row.picard_iters = traj.iterations;
      row.defect = avg(fp.point).norm();
      if (table.averaged_zero) {
        for (const auto& state : traj.states) row.sup_gap = std::max(row.sup_gap, (state - *table.averaged_zero).norm());
      }
      guess = fp.point;
    } catch (const Error& e) {
      row.status = std::string(to_string(e.kind()));
      all_ok = false;
    }
    table.rows.push_back(std::move(row));
  }

  std::vector<double> defects;
  for (const auto& row : table.rows) {
    if (row.status == "ok") defects.push_back(row.defect);
  }
  table.monotone = defects.size() >= 2;
  for (std::size_t i = 1; i < defects.size(); ++i) {
    if (defects[i] > defects[i - 1] * (1.0 + 1e-9) + 1e-12) table.monotone = false;
  }
  if (table.monotone && all_ok) {
    const double first = defects.front();
    const double last = defects.back();
    table.passed = last <= 1e-2 * first || last <= 1e-9;
  }
  return table;
}

MonodromyReport monodromy(const GeneratorFamily& family, const std::function<Matrix(double)>& f_inf,
                          double lambda, int n) {
  if (!(lambda > 0.0)) fail(ErrorKind::kInvalidInput, "lambda must be positive");
  const Matrix f0 = f_inf(0.0);
  if (f0.rows() != family.dim || f0.cols() != family.dim) {
    fail(ErrorKind::kDimensionMismatch, "asymptotic linearization has the wrong size");
  }
  if (operator_norm(f0 - f_inf(family.period)) > 1e-12) {
    fail(ErrorKind::kPrecondition, "asymptotic linearization is not periodic");
  }
  GeneratorFamily linear = family;
  auto inner = family.generator;
  linear.generator = [inner, f_inf, lambda](double t) { return Matrix(lambda * (inner(t) + f_inf(t))); };
  const EvolutionSystem r(std::move(linear), n);

  MonodromyReport report;
  report.matrix = r.monodromy();
  Eigen::EigenSolver<Matrix> eig(report.matrix, false);
  report.distance_to_one = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const std::complex<double> mu = eig.eigenvalues()(i);
    report.eigenvalues.push_back(mu);
    report.distance_to_one = std::min(report.distance_to_one, std::abs(mu - 1.0));
  }
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
            [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
  report.nondegenerate = report.distance_to_one > 1e-8;
  return report;
}

AveragingReport averaging_degree_check(const GeneratorFamily& family, const NonlinearField& field,
                                       const Region& region, const std::vector<double>& lambdas,
                                       const AveragingOptions& options) {
  if (region.dim() != family.dim) fail(ErrorKind::kDimensionMismatch, "region and family dimensions differ");
  const AveragedField avg = average(family, field);
  const VectorField averaged = [&avg](const Vector& x) { return avg(x); };
  require_admissible(averaged, region, options.degree.boundary_resolution);

  AveragingReport report;
  report.averaged_degree = deg_hat(avg.a_hat, avg.f_hat, region, options.degree);
  const bool planar = region.dim() == 2;
  if (planar) {
    const Matrix a_inv = -resolvent(avg.a_hat, 0.0);
    const VectorField hat = [&avg, a_inv](const Vector& x) { return Vector(x + a_inv * avg.f_hat(x)); };
    report.averaged_winding = winding_number_2d(hat, region, options.winding_samples);
  }

  for (double lambda : lambdas) {
    AveragingRow row;
    row.lambda = lambda;
    try {
      const TranslationOperator phi(family, field, lambda, options.sweep.n, options.sweep.mild);
      const VectorField g = [&phi](const Vector& x) { return Vector(x - phi(x)); };
      try {
        row.boundary_min = require_admissible(g, region, options.degree.boundary_resolution);
        row.admissible = true;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kInadmissibleRegion) throw;
        row.status = std::string(to_string(e.kind()));
      }
      if (row.admissible) {
        row.degree = brouwer_degree(g, region, options.degree);
        if (planar) row.winding = winding_number_2d(g, region, options.winding_samples);
      }
    } catch (const Error& e) {
      row.status = std::string(to_string(e.kind()));
    }
    report.rows.push_back(std::move(row));
  }

  std::vector<const AveragingRow*> ascending;
  for (const auto& row : report.rows) ascending.push_back(&row);
  std::sort(ascending.begin(), ascending.end(), [](auto* a, auto* b) { return a->lambda < b->lambda; });
  for (const auto* row : ascending) {
    if (!row->admissible) break;
    report.lambda0 = row->lambda;
  }
  report.consistent = report.lambda0.has_value();
  for (const auto& row : report.rows) {
    if (!report.lambda0 || row.lambda > *report.lambda0) continue;
    if (row.degree != report.averaged_degree) report.consistent = false;
    if (row.winding && *row.winding != report.averaged_degree) report.consistent = false;
  }
  if (report.averaged_winding && *report.averaged_winding != report.averaged_degree) report.consistent = false;
  return report;
}

}  // namespace evolver

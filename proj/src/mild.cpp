#include "evolver/mild.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evolver/error.hpp"

namespace evolver {

NonlinearField zero_field(Eigen::Index dim, double period) {
  NonlinearField field;
  field.dim = dim;
  field.eval = [dim](double, const Vector&) { return Vector(Vector::Zero(dim)); };
  field.period = period;
  return field;
}

FieldReport validate(const NonlinearField& field, Rng& rng, int samples, double radius) {
  FieldReport report;
  if (field.dim < 1 || !field.eval) {
    report.issues.push_back("field needs dim >= 1 and an evaluator");
    return report;
  }
  for (int i = 0; i < samples; ++i) {
    const double t = rng.uniform(0.0, field.period);
    const Vector x1 = rng.vector(field.dim, -radius, radius);
    const Vector x2 = rng.vector(field.dim, -radius, radius);
    const Vector f1 = field(t, x1);
    const Vector f2 = field(t, x2);
    const double dx = (x1 - x2).norm();
    if (dx > 0.0) report.max_lipschitz_ratio = std::max(report.max_lipschitz_ratio, (f1 - f2).norm() / dx);
    report.max_growth_ratio = std::max(report.max_growth_ratio, f1.norm() / (1.0 + x1.norm()));
    report.periodicity_gap = std::max(report.periodicity_gap, (field(0.0, x1) - field(field.period, x1)).norm());
  }
  if (report.max_lipschitz_ratio > field.lipschitz * (1.0 + 1e-9) + 1e-12) {
    report.issues.push_back("sampled Lipschitz ratio " + std::to_string(report.max_lipschitz_ratio) +
                            " exceeds declared constant " + std::to_string(field.lipschitz));
  }
  if (report.max_growth_ratio > field.growth * (1.0 + 1e-9) + 1e-12) {
    report.issues.push_back("sampled growth ratio " + std::to_string(report.max_growth_ratio) +
                            " exceeds declared constant " + std::to_string(field.growth));
  }
  if (field.periodic && report.periodicity_gap > 1e-12) {
    report.issues.push_back("F(0, x) != F(T, x)");
  }
  return report;
}

Propagator::Propagator(EvolutionSystem evolution, TimeGrid grid)
    : evolution_(std::move(evolution)), grid_(grid) {
  if (grid_.intervals < 1 || !(grid_.stop > grid_.start)) {
    fail(ErrorKind::kGridMismatch, "trajectory grid needs at least one interval and positive length");
  }
  transfer_.reserve(grid_.intervals);
  for (int i = 0; i < grid_.intervals; ++i) transfer_.push_back(evolution_(grid_.at(i + 1), grid_.at(i)));
}

namespace {

double sup_distance(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).lpNorm<Eigen::Infinity>());
  return worst;
}

void sweep(const Propagator& p, const Vector& x, std::span<const Vector> forcing, std::vector<Vector>& out) {
  const TimeGrid& grid = p.grid();
  const double half = 0.5 * grid.step();
  out.resize(grid.nodes());
  out[0] = x;
  for (int i = 0; i < grid.intervals; ++i) {
    out[i + 1] = p.transfer(i) * (out[i] + half * forcing[i]) + half * forcing[i + 1];
  }
}

}  // namespace

Trajectory sigma_apply(const Propagator& propagator, const Vector& x, std::span<const Vector> forcing) {
  const TimeGrid& grid = propagator.grid();
  if (static_cast<int>(forcing.size()) != grid.nodes()) {
    fail(ErrorKind::kGridMismatch, "forcing has " + std::to_string(forcing.size()) + " samples, grid has " +
                                       std::to_string(grid.nodes()) + " nodes");
  }
  if (x.size() != propagator.dim()) fail(ErrorKind::kDimensionMismatch, "initial state has the wrong dimension");
  for (const auto& w : forcing) {
    if (w.size() != propagator.dim()) fail(ErrorKind::kDimensionMismatch, "forcing sample has the wrong dimension");
  }
  Trajectory traj;
  traj.grid = grid;
  sweep(propagator, x, forcing, traj.states);
  return traj;
}

Trajectory sigma_apply(const EvolutionSystem& r, const Vector& x, std::span<const Vector> forcing,
                       const TimeGrid& grid) {
  return sigma_apply(Propagator(r, grid), x, forcing);
}

Trajectory mild_solve(const Propagator& propagator, const NonlinearField& field, const Vector& x0,
                      double lambda, const MildOptions& options) {
  require_finite(x0, "initial state");
  if (x0.size() != propagator.dim() || field.dim != propagator.dim()) {
    fail(ErrorKind::kDimensionMismatch, "field, state and evolution system dimensions differ");
  }
  const TimeGrid& grid = propagator.grid();
  std::vector<Vector> forcing(grid.nodes(), Vector::Zero(propagator.dim()));
  Trajectory traj;
  traj.grid = grid;
  traj.lambda = lambda;
  sweep(propagator, x0, forcing, traj.states);

  std::vector<Vector> next;
  double update = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    for (int i = 0; i < grid.nodes(); ++i) forcing[i] = lambda * field(grid.at(i), traj.states[i]);
    sweep(propagator, x0, forcing, next);
    update = sup_distance(next, traj.states);
    traj.states.swap(next);
    traj.iterations = iter;
    traj.residual = update;
    if (!std::isfinite(update)) break;
    if (update < options.tol) return traj;
  }
  fail(ErrorKind::kDivergence, "Picard iteration did not converge after " + std::to_string(options.max_iter) +
                                   " sweeps; last update " + std::to_string(update));
}

Trajectory mild_solve(const EvolutionSystem& r, const NonlinearField& field, const Vector& x0, double lambda,
                      const MildOptions& options) {
  return mild_solve(Propagator(r, TimeGrid{0.0, r.period(), options.grid}), field, x0, lambda, options);
}

Vector translate(const EvolutionSystem& r, const NonlinearField& field, double t, const Vector& x,
                 double lambda, const MildOptions& options) {
  if (t < 0.0 || t > r.period() * (1.0 + 1e-12)) fail(ErrorKind::kOrdering, "translation time outside [0, T]");
  if (t == 0.0) return x;
  const int cells = std::max(1, static_cast<int>(std::lround(options.grid * t / r.period())));
  return mild_solve(Propagator(r, TimeGrid{0.0, t, cells}), field, x, lambda, options).final_state();
}

TranslationOperator::TranslationOperator(const GeneratorFamily& family, NonlinearField field, double lambda,
                                         int n, MildOptions options)
    : propagator_(EvolutionSystem(scaled(family, lambda), n), TimeGrid{0.0, family.period, options.grid}),
      field_(std::move(field)),
      lambda_(lambda),
      options_(options) {}

Trajectory TranslationOperator::trajectory(const Vector& x) const {
  return mild_solve(propagator_, field_, x, lambda_, options_);
}

namespace {

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& map, const Vector& x, double step) {
  const Eigen::Index d = x.size();
  Matrix jac(d, d);
  const double h = step * std::max(1.0, x.lpNorm<Eigen::Infinity>());
  for (Eigen::Index j = 0; j < d; ++j) {
    Vector plus = x;
    Vector minus = x;
    plus(j) += h;
    minus(j) -= h;
    jac.col(j) = (map(plus) - map(minus)) / (2.0 * h);
  }
  return jac;
}

}  // namespace

FixedPointResult fixed_point(const std::function<Vector(const Vector&)>& map, const Vector& x_init,
                             FixedPointMethod method, const FixedPointOptions& options) {
  require_finite(x_init, "initial guess");
  Vector x = x_init;
  Vector gx = map(x) - x;
  double res = gx.norm();
  if (method == FixedPointMethod::kPicard) {
    for (int iter = 0; iter < options.max_picard_iter; ++iter) {
      if (res <= options.tol) return {x, res, iter};
      x += gx;
      gx = map(x) - x;
      res = gx.norm();
      if (!std::isfinite(res)) break;
    }
    if (res <= options.tol) return {x, res, options.max_picard_iter};
    fail(ErrorKind::kDivergence, "Picard fixed-point iteration stalled at residual " + std::to_string(res));
  }

  const Eigen::Index d = x.size();
  for (int iter = 0; iter < options.max_iter; ++iter) {
    if (res <= options.tol) return {x, res, iter};
    const Matrix jac = fd_jacobian(map, x, options.fd_step) - Matrix::Identity(d, d);
    Eigen::FullPivLU<Matrix> lu(jac);
    const double scale = std::max(1.0, jac.cwiseAbs().maxCoeff());
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-14 * std::pow(scale, d) ||
        lu.rcond() < 1e-13) {
      fail(ErrorKind::kDegenerateFixedPoint,
           "Jacobian of Phi - I is singular at iteration " + std::to_string(iter));
    }
    const Vector delta = -lu.solve(gx);
    double alpha = 1.0;
    Vector trial;
    Vector g_trial;
    double res_trial = std::numeric_limits<double>::infinity();
    for (int halving = 0; halving < 30; ++halving) {
      trial = x + alpha * delta;
      g_trial = map(trial) - trial;
      res_trial = g_trial.norm();
      if (std::isfinite(res_trial) && res_trial < res) break;
      alpha *= 0.5;
    }
    if (!(res_trial < res)) {
      if (res <= options.tol) break;
      fail(ErrorKind::kDivergence, "Newton line search stalled at residual " + std::to_string(res));
    }
    x = trial;
    gx = g_trial;
    res = res_trial;
  }
  if (res <= options.tol) return {x, res, options.max_iter};
  fail(ErrorKind::kDivergence, "Newton did not reach tolerance; residual " + std::to_string(res));
}

}  // namespace evolver

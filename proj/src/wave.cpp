#include "evolver/wave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "evolver/error.hpp"
#include "evolver/semigroup.hpp"

namespace evolver {

namespace {

constexpr int kMaxModes = 64;
constexpr double kInvPhi = 0.6180339887498949;

[[noreturn]] void bad_param(const std::string& what) { fail(ErrorKind::kConfiguration, "wave model: " + what); }

// Grid minimum on [0, period] polished by golden section around the best node.
template <typename Fn>
double refined_min(const Fn& fn, double period, int samples) {
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double v = fn(period * i / samples);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  double lo = period * std::max(0, best - 1) / samples;
  double hi = period * std::min(samples, best + 1) / samples;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = fn(x1);
  double f2 = fn(x2);
  for (int iter = 0; iter < 60; ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = fn(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = fn(x2);
    }
  }
  return std::min({best_value, f1, f2});
}

double analytic_rate(double eta, double beta_min, double gamma) {
  return std::min(0.5 * eta, beta_min - eta - 0.5 * eta * gamma * gamma);
}

void check_nonlinearity(const WaveParams& p) {
  if (!(p.lipschitz >= 0.0) || !(p.growth >= 0.0)) bad_param("L and c must be nonnegative");
  if (!std::isfinite(p.f_inf)) bad_param("f_inf must be finite");
  if (!p.f) return;
  constexpr int kTimes = 16;
  for (int j = 0; j <= kTimes; ++j) {
    const double t = p.period * j / kTimes;
    double prev = p.f(t, -10.0);
    for (int i = -999; i <= 1000; ++i) {
      const double s = 0.01 * i;
      const double value = p.f(t, s);
      if (!std::isfinite(value)) bad_param("f is not finite at s = " + std::to_string(s));
      if (std::abs(value - prev) > p.lipschitz * 0.01 * (1.0 + 1e-6) + 1e-9) {
        bad_param("f violates the Lipschitz bound L = " + std::to_string(p.lipschitz) + " near s = " +
                  std::to_string(s));
      }
      if (std::abs(value) > p.growth * (1.0 + std::abs(s)) * (1.0 + 1e-9) + 1e-12) {
        bad_param("f violates the growth bound c = " + std::to_string(p.growth) + " at s = " + std::to_string(s));
      }
      if (std::abs(p.f(0.0, s) - p.f(p.period, s)) > 1e-12) bad_param("f(0, s) != f(T, s)");
      prev = value;
    }
  }
  // Slope corridor |f(t, s) / s - f_inf| at |s| = 1e2, 1e3, 1e4.
  double previous = std::numeric_limits<double>::infinity();
  for (double s : {1e2, 1e3, 1e4}) {
    double deviation = 0.0;
    for (int j = 0; j <= kTimes; ++j) {
      const double t = p.period * j / kTimes;
      for (double sign : {-1.0, 1.0}) {
        const double value = p.f(t, sign * s);
        if (std::abs(value) > p.growth * (1.0 + s) * (1.0 + 1e-9) + 1e-12) {
          bad_param("f violates the growth bound at |s| = " + std::to_string(s));
        }
        deviation = std::max(deviation, std::abs(value / (sign * s) - p.f_inf));
      }
    }
    if (deviation > previous + 1e-12) bad_param("f(t, s)/s does not approach f_inf");
    previous = deviation;
  }
  if (previous > 0.1) bad_param("|f(t, s)/s - f_inf| = " + std::to_string(previous) + " > 0.1 at |s| = 1e4");
}

}  // namespace

WaveModel::WaveModel(const WaveParams& p)
    : k_(p.k),
      ell_(p.ell),
      period_(p.period),
      beta_(p.beta),
      f_(p.f),
      lipschitz_(p.lipschitz),
      growth_(p.growth),
      f_inf_(p.f_inf),
      coupling_(p.coupling) {
  if (k_ < 1 || k_ > kMaxModes) bad_param("mode count must lie in [1, 64]");
  if (!(ell_ > 0.0) || !std::isfinite(ell_)) bad_param("domain length must be positive");
  if (!(period_ > 0.0) || !std::isfinite(period_)) bad_param("period must be positive");
  eigs_.resize(k_);
  if (p.eigenvalues) {
    if (static_cast<int>(p.eigenvalues->size()) != k_) bad_param("eigenvalue list must have k entries");
    for (int i = 0; i < k_; ++i) {
      eigs_(i) = (*p.eigenvalues)[i];
      if (!(eigs_(i) > 0.0) || !std::isfinite(eigs_(i))) bad_param("eigenvalues must be positive");
      if (i > 0 && eigs_(i) < eigs_(i - 1)) bad_param("eigenvalues must be nondecreasing");
    }
  } else {
    for (int i = 0; i < k_; ++i) {
      const double root = (i + 1) * std::numbers::pi / ell_;
      eigs_(i) = root * root;
    }
  }

  if (!beta_) bad_param("damping beta(t) is required");
  for (int i = 0; i <= 1024; ++i) {
    if (!std::isfinite(beta_(period_ * i / 1024))) bad_param("beta is not finite");
  }
  beta_min_ = refined_min(beta_, period_, 1024);
  beta_max_ = -refined_min([this](double t) { return -beta_(t); }, period_, 1024);
  if (!(beta_min_ > 0.0)) bad_param("beta must be bounded below by a positive beta_0");
  if (std::abs(beta_(0.0) - beta_(period_)) > 1e-12) bad_param("beta(0) != beta(T)");

  check_nonlinearity(p);
  if (p.check_resonance && resonance_gap() <= 1e-6) {
    bad_param("f_inf = " + std::to_string(f_inf_) + " makes A + f_inf singular (resonance)");
  }
  if (p.eta && !(*p.eta > 0.0 && *p.eta <= 1.0)) bad_param("eta must lie in (0, 1]");
  if (coupling_ && (coupling_->rows() != k_ || coupling_->cols() != k_)) bad_param("coupling must be k x k");

  const int m = p.collocation > 0 ? p.collocation : 4 * k_;
  if (m < k_) bad_param("collocation needs at least k nodes");
  nodes_.resize(m);
  samples_.resize(m, k_);
  const double norm = std::sqrt(2.0 / ell_);
  for (int j = 0; j < m; ++j) {
    nodes_(j) = ell_ * (j + 1) / (m + 1);
    for (int i = 0; i < k_; ++i) samples_(j, i) = norm * std::sin((i + 1) * std::numbers::pi * (j + 1) / (m + 1));
  }
  projection_ = (ell_ / (m + 1)) * samples_.transpose();
}

double WaveModel::resonance_gap() const { return (eigs_.array() + f_inf_).abs().minCoeff(); }

Matrix WaveModel::generator(double t) const {
  Matrix a = Matrix::Zero(2 * k_, 2 * k_);
  a.topRightCorner(k_, k_).setIdentity();
  a.bottomLeftCorner(k_, k_) = -eigs_.asDiagonal().toDenseMatrix();
  const double b = beta_(t);
  if (coupling_) {
    a.bottomRightCorner(k_, k_) = -b * *coupling_;
  } else {
    a.bottomRightCorner(k_, k_).diagonal().setConstant(-b);
  }
  return a;
}

Matrix WaveModel::metric(double eta) const {
  Matrix g(2 * k_, 2 * k_);
  g.topLeftCorner(k_, k_) = (eigs_.array() + eta * eta).matrix().asDiagonal();
  g.topRightCorner(k_, k_) = eta * Matrix::Identity(k_, k_);
  g.bottomLeftCorner(k_, k_) = eta * Matrix::Identity(k_, k_);
  g.bottomRightCorner(k_, k_).setIdentity();
  return g;
}

Vector WaveModel::project_nonlinearity(double t, const Vector& a) const {
  if (a.size() != k_) fail(ErrorKind::kDimensionMismatch, "mode vector has the wrong size");
  if (!f_) return Vector::Zero(k_);
  Vector values = samples_ * a;
  for (Eigen::Index j = 0; j < values.size(); ++j) values(j) = f_(t, values(j));
  return projection_ * values;
}

Vector WaveModel::field(double t, const Vector& z) const {
  if (z.size() != dim()) fail(ErrorKind::kDimensionMismatch, "wave state has the wrong size");
  Vector out = Vector::Zero(dim());
  out.tail(k_) = -project_nonlinearity(t, z.head(k_));
  return out;
}

double WaveModel::energy(const Vector& z) const {
  const auto a = z.head(k_).array();
  return 0.5 * ((eigs_.array() * a * a).sum() + z.tail(k_).squaredNorm());
}

double eta_inner(const Vector& z1, const Vector& z2, const WaveModel& model, double eta) {
  if (z1.size() != model.dim() || z2.size() != model.dim()) {
    fail(ErrorKind::kDimensionMismatch, "states must have dimension 2k");
  }
  const Eigen::Index k = model.modes();
  const Vector w1 = z1.tail(k) + eta * z1.head(k);
  const Vector w2 = z2.tail(k) + eta * z2.head(k);
  return (model.eigenvalues().array() * z1.head(k).array() * z2.head(k).array()).sum() + w1.dot(w2);
}

double eta_inner(const Vector& z1, const Vector& z2, const WaveModel& model) {
  return eta_inner(z1, z2, model, model.eta());
}

EtaChoice select_eta(const WaveModel& model) {
  EtaChoice choice;
  choice.beta_min = model.beta_min();
  choice.gamma = (model.beta_max() + 1.0) / std::sqrt(model.eigenvalues()(0));
  const double g2 = choice.gamma * choice.gamma;
  const double upper = std::min(1.0, choice.beta_min / (1.0 + 0.5 * g2));
  if (!(upper > 0.0)) fail(ErrorKind::kConfiguration, "no admissible eta: beta_0 is not positive");

  double lo = 0.0;
  double hi = upper;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double r1 = analytic_rate(x1, choice.beta_min, choice.gamma);
  double r2 = analytic_rate(x2, choice.beta_min, choice.gamma);
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * upper; ++iter) {
    if (r1 > r2) {
      hi = x2;
      x2 = x1;
      r2 = r1;
      x1 = hi - kInvPhi * (hi - lo);
      r1 = analytic_rate(x1, choice.beta_min, choice.gamma);
    } else {
      lo = x1;
      x1 = x2;
      r1 = r2;
      x2 = lo + kInvPhi * (hi - lo);
      r2 = analytic_rate(x2, choice.beta_min, choice.gamma);
    }
  }
  choice.eta = 0.5 * (lo + hi);
  choice.analytic_rate = analytic_rate(choice.eta, choice.beta_min, choice.gamma);
  if (!(choice.analytic_rate > 1e-12)) {
    fail(ErrorKind::kConfiguration, "no admissible eta: analytic rate is not positive (beta_0 too small)");
  }
  const Matrix g = model.metric(choice.eta);
  choice.numeric_rate =
      refined_min([&](double t) { return dissipativity_rate(model.generator(t), g); }, model.period(), 256);
  return choice;
}

WaveSystem build_wave_model(const WaveParams& params) {
  WaveModel model(params);
  EtaChoice choice;
  if (params.eta) {
    choice.eta = *params.eta;
    choice.beta_min = model.beta_min();
    choice.gamma = (model.beta_max() + 1.0) / std::sqrt(model.eigenvalues()(0));
    choice.analytic_rate = analytic_rate(choice.eta, choice.beta_min, choice.gamma);
    const Matrix g = model.metric(choice.eta);
    choice.numeric_rate =
        refined_min([&](double t) { return dissipativity_rate(model.generator(t), g); }, model.period(), 256);
  } else {
    choice = select_eta(model);
  }
  model.set_eta(choice.eta);

  GeneratorFamily family;
  family.dim = model.dim();
  family.generator = [model](double t) { return model.generator(t); };
  family.period = model.period();
  family.omega = choice.numeric_rate;
  family.metric = model.metric();
  family.periodic = true;
  family.differentiable = true;

  NonlinearField field;
  field.dim = model.dim();
  field.eval = [model](double t, const Vector& z) { return model.field(t, z); };
  field.lipschitz = model.lipschitz();
  field.growth = model.growth() * std::max(1.0, std::sqrt(model.ell()));
  field.periodic = true;
  field.period = model.period();

  return WaveSystem{std::move(model), std::move(family), std::move(field), choice};
}

std::vector<Vector> wave_forcing(const WaveModel& model, const Trajectory& traj, double lambda) {
  std::vector<Vector> out;
  out.reserve(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out.push_back(lambda * model.field(traj.grid.at(static_cast<int>(i)), traj.states[i]));
  }
  return out;
}

double energy_residual(const Trajectory& traj, const WaveModel& model, std::span<const Vector> forcing,
                       double lambda) {
  const int nodes = traj.grid.nodes();
  if (static_cast<int>(traj.states.size()) != nodes || static_cast<int>(forcing.size()) != nodes) {
    fail(ErrorKind::kGridMismatch, "trajectory, forcing and grid sizes differ");
  }
  const Eigen::Index k = model.modes();
  const double h = traj.grid.step();
  double worst = 0.0;
  for (int i = 1; i + 1 < nodes; ++i) {
    const Vector& z = traj.states[i];
    const double t = traj.grid.at(i);
    const double derivative = (model.energy(traj.states[i + 1]) - model.energy(traj.states[i - 1])) / (2.0 * h);
    // z^T Q (lambda A z + w) with Q = diag(Lambda, I)
    const Vector az = lambda * model.generator(t) * z + forcing[i];
    const double rhs =
        (model.eigenvalues().array() * z.head(k).array() * az.head(k).array()).sum() + z.tail(k).dot(az.tail(k));
    worst = std::max(worst, std::abs(derivative - rhs));
  }
  return worst;
}

double spectral_invariance_gap(const EvolutionSystem& small, const EvolutionSystem& large, double t, double s) {
  const Eigen::Index k = small.family().dim / 2;
  const Eigen::Index kp = large.family().dim / 2;
  if (2 * k != small.family().dim || 2 * kp != large.family().dim || !(k < kp)) {
    fail(ErrorKind::kDimensionMismatch, "invariance gap needs wave systems with k < k'");
  }
  const Matrix r = small(t, s);
  const Matrix rp = large(t, s);
  const auto embed = [k, kp](Eigen::Index j) { return j < k ? j : kp + (j - k); };
  double worst = 0.0;
  for (Eigen::Index j = 0; j < 2 * k; ++j) {
    Vector embedded = Vector::Zero(2 * kp);
    for (Eigen::Index i = 0; i < 2 * k; ++i) embedded(embed(i)) = r(i, j);
    worst = std::max(worst, (rp.col(embed(j)) - embedded).norm());
  }
  return worst;
}

double spectral_invariance_gap(const WaveSystem& small, const WaveSystem& large, double t, double s, int n) {
  return spectral_invariance_gap(EvolutionSystem(small.family, n), EvolutionSystem(large.family, n), t, s);
}

Matrix asymptotic_linearization(const WaveModel& model) {
  const Eigen::Index k = model.modes();
  Matrix f = Matrix::Zero(2 * k, 2 * k);
  f.bottomLeftCorner(k, k).diagonal().setConstant(-model.f_inf());
  return f;
}

NondegeneracyReport linear_nondegeneracy(const WaveSystem& system, const std::vector<double>& lambdas, int n) {
  const Matrix f_inf = asymptotic_linearization(system.model);
  const auto constant = [f_inf](double) { return f_inf; };
  NondegeneracyReport report;
  report.nondegenerate = true;
  for (double lambda : lambdas) {
    const MonodromyReport mono = monodromy(system.family, constant, lambda, n);
    NondegeneracyRow row;
    row.lambda = lambda;
    row.distance_to_one = mono.distance_to_one;
    row.spectral_radius = mono.eigenvalues.empty() ? 0.0 : std::abs(mono.eigenvalues.front());
    row.nondegenerate = mono.nondegenerate;
    report.nondegenerate = report.nondegenerate && row.nondegenerate;
    report.rows.push_back(row);
  }
  const Matrix averaged = average_generator(system.family) + f_inf;
  report.averaged_det = averaged.determinant();
  Eigen::JacobiSVD<Matrix> svd(averaged);
  report.averaged_smin = svd.singularValues().minCoeff();
  report.kernel_trivial = report.averaged_smin > 1e-8 * std::max(1.0, svd.singularValues().maxCoeff());
  report.nondegenerate = report.nondegenerate && report.kernel_trivial;
  return report;
}

PeriodicWave find_periodic_wave(const WaveSystem& system, double lambda, const Vector& x_init,
                                const PeriodicOptions& options) {
  if (x_init.size() != system.model.dim()) fail(ErrorKind::kDimensionMismatch, "initial state has the wrong size");
  const TranslationOperator phi(system.family, system.field, lambda, options.n, options.mild);
  const FixedPointResult fp = fixed_point(phi, x_init, FixedPointMethod::kNewton, options.fixed_point);
  PeriodicWave out;
  out.trajectory = phi.trajectory(fp.point);
  out.x = fp.point;
  out.newton_iters = fp.iterations;
  out.residual = metric_norm(out.trajectory.final_state() - out.trajectory.states.front(), system.model.metric());
  if (out.residual > 1e-6) {
    fail(ErrorKind::kDivergence, "periodic closure gap " + std::to_string(out.residual) + " exceeds 1e-6");
  }
  return out;
}

}  // namespace evolver

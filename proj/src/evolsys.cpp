#include "evolver/evolsys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "evolver/error.hpp"
#include "evolver/semigroup.hpp"

namespace evolver {

Matrix GeneratorFamily::metric_or_identity() const {
  return metric ? *metric : Matrix::Identity(dim, dim);
}

namespace {

constexpr int kValidationSamples = 256;

double max_jump(const GeneratorFamily& family, int cells) {
  double worst = 0.0;
  Matrix prev = family.at(0.0);
  for (int i = 1; i <= cells; ++i) {
    Matrix next = family.at(family.period * i / cells);
    worst = std::max(worst, operator_norm(next - prev));
    prev = std::move(next);
  }
  return worst;
}

double min_rate_on_grid(const GeneratorFamily& family, int samples) {
  const Matrix g = family.metric_or_identity();
  double rate = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    rate = std::min(rate, dissipativity_rate(family.at(family.period * i / samples), g));
  }
  return rate;
}

}  // namespace

FamilyReport validate(const GeneratorFamily& family) {
  FamilyReport report;
  if (family.dim < 1 || !family.generator || !(family.period > 0.0)) {
    report.issues.push_back("family needs dim >= 1, a generator and a positive period");
    return report;
  }
  const Matrix a0 = family.at(0.0);
  if (a0.rows() != family.dim || a0.cols() != family.dim) {
    report.issues.push_back("generator returns a matrix of the wrong size");
    return report;
  }
  if (family.metric) {
    try {
      require_spd(*family.metric);
    } catch (const Error& e) {
      report.issues.push_back(e.what());
      return report;
    }
  }
  report.periodicity_gap = operator_norm(a0 - family.at(family.period));
  if (family.periodic && report.periodicity_gap > 1e-12) {
    report.issues.push_back("A(0) != A(T): periodicity gap " + std::to_string(report.periodicity_gap));
  }
  report.min_rate = min_rate_on_grid(family, kValidationSamples);
  if (report.min_rate < family.omega - 1e-10) {
    report.issues.push_back("claimed rate " + std::to_string(family.omega) + " exceeds sampled rate " +
                            std::to_string(report.min_rate));
  }
  report.coarse_modulus = max_jump(family, 64);
  report.fine_modulus = max_jump(family, 1024);
  if (report.fine_modulus > 0.5 * report.coarse_modulus + 1e-12) {
    report.issues.push_back("continuity modulus does not shrink under refinement");
  }
  return report;
}

void require_valid(const GeneratorFamily& family) {
  const FamilyReport report = validate(family);
  if (!report.ok()) fail(ErrorKind::kPrecondition, "generator family: " + report.issues.front());
}

GeneratorFamily constant_family(const Matrix& a, double period, std::optional<Matrix> metric) {
  require_square(a, "generator");
  GeneratorFamily family;
  family.dim = a.rows();
  family.generator = [a](double) { return a; };
  family.period = period;
  family.metric = metric;
  family.omega = metric ? dissipativity_rate(a, *metric) : dissipativity_rate(a);
  family.differentiable = true;
  return family;
}

GeneratorFamily scaled(const GeneratorFamily& family, double lambda) {
  GeneratorFamily out = family;
  auto inner = family.generator;
  out.generator = [inner, lambda](double t) { return Matrix(lambda * inner(t)); };
  out.omega = lambda * family.omega;
  return out;
}

GeneratorFamily perturbed(const GeneratorFamily& family, std::function<Matrix(double)> extra) {
  GeneratorFamily out = family;
  auto inner = family.generator;
  out.generator = [inner, extra](double t) { return Matrix(inner(t) + extra(t)); };
  out.omega = min_rate_on_grid(out, kValidationSamples);
  return out;
}

EvolutionSystem::EvolutionSystem(GeneratorFamily family, int n) : family_(std::move(family)), n_(n) {
  if (n < 1) fail(ErrorKind::kInvalidInput, "subdivision count must be positive");
  if (n > kMaxSubdivisions) {
    fail(ErrorKind::kResourceGuard, "subdivision count " + std::to_string(n) + " exceeds 2^14");
  }
  if (!family_.generator || family_.dim < 1 || !(family_.period > 0.0)) {
    fail(ErrorKind::kInvalidInput, "generator family is incomplete");
  }
  h_ = family_.period / n_;
  frozen_.reserve(n_);
  steps_.reserve(n_);
  prefix_.reserve(n_ + 1);
  prefix_.push_back(Matrix::Identity(family_.dim, family_.dim));
  for (int j = 0; j < n_; ++j) {
    frozen_.push_back(family_.at(node(j)));
    if (frozen_.back().rows() != family_.dim || frozen_.back().cols() != family_.dim) {
      fail(ErrorKind::kDimensionMismatch, "generator returned a matrix of the wrong size");
    }
    steps_.push_back(mat_exp(frozen_.back(), h_));
    prefix_.push_back(steps_.back() * prefix_.back());
  }
}

EvolutionSystem::Position EvolutionSystem::locate(double t) const {
  const double scaled_t = t / h_;
  const double nearest = std::round(scaled_t);
  if (std::abs(scaled_t - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    const int j = static_cast<int>(nearest);
    if (j >= n_) return {n_ - 1, h_};
    return {j, 0.0};
  }
  const int cell = std::clamp(static_cast<int>(std::floor(scaled_t)), 0, n_ - 1);
  return {cell, t - node(cell)};
}

Matrix EvolutionSystem::partial(int cell, double tau) const {
  if (tau == 0.0) return Matrix::Identity(family_.dim, family_.dim);
  if (tau == h_) return steps_[cell];
  return mat_exp(frozen_[cell], tau);
}

void EvolutionSystem::check_order(double t, double s) const {
  const double slack = 1e-12 * family_.period;
  if (!(s <= t) || s < -slack || t > family_.period + slack) {
    fail(ErrorKind::kOrdering, "evolution query needs 0 <= s <= t <= T (got t = " + std::to_string(t) +
                                   ", s = " + std::to_string(s) + ")");
  }
}

Matrix EvolutionSystem::operator()(double t, double s) const {
  check_order(t, s);
  const Position to = locate(t);
  const Position from = locate(s);
  if (to.cell == from.cell) return mat_exp(frozen_[to.cell], std::max(0.0, to.offset - from.offset));
  Matrix product;
  if (from.cell == 0 && from.offset == 0.0) {
    product = prefix_[to.cell];
  } else {
    product = partial(from.cell, h_ - from.offset);
    for (int j = from.cell + 1; j < to.cell; ++j) product = steps_[j] * product;
  }
  if (to.offset != 0.0) product = partial(to.cell, to.offset) * product;
  return product;
}

Vector EvolutionSystem::apply(double t, double s, const Vector& x) const {
  check_order(t, s);
  if (x.size() != family_.dim) fail(ErrorKind::kDimensionMismatch, "state has the wrong dimension");
  const Position to = locate(t);
  const Position from = locate(s);
  if (to.cell == from.cell) {
    return mat_exp(frozen_[to.cell], std::max(0.0, to.offset - from.offset)) * x;
  }
  Vector y;
  if (from.cell == 0 && from.offset == 0.0) {
    y = prefix_[to.cell] * x;
  } else {
    y = partial(from.cell, h_ - from.offset) * x;
    for (int j = from.cell + 1; j < to.cell; ++j) y = steps_[j] * y;
  }
  if (to.offset != 0.0) y = partial(to.cell, to.offset) * y;
  return y;
}

EvolutionSystem build_evolution(const GeneratorFamily& family, int n) {
  return EvolutionSystem(family, n);
}

Vector evolution_apply(const EvolutionSystem& r, double t, double s, const Vector& x) {
  return r.apply(t, s, x);
}

double cocycle_defect(const EvolutionSystem& r, double t, double mid, double s) {
  if (!(s <= mid && mid <= t)) fail(ErrorKind::kOrdering, "cocycle defect needs s <= r <= t");
  return operator_norm(r(t, s) - r(t, mid) * r(mid, s));
}

double contraction_check(const EvolutionSystem& r, double omega, int samples) {
  if (samples < 2) fail(ErrorKind::kInvalidInput, "contraction check needs at least two samples");
  const Matrix g = r.family().metric_or_identity();
  const double period = r.period();
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double s = period * i / (samples - 1);
    for (int j = i + 1; j < samples; ++j) {
      const double t = period * j / (samples - 1);
      worst = std::max(worst, operator_norm(r(t, s), g) * std::exp(omega * (t - s)) - 1.0);
    }
  }
  return worst;
}

ContinuityGap family_continuity_gap(const GeneratorFamily& first, const GeneratorFamily& second,
                                    int n, const Vector& v, int s_samples) {
  if (first.dim != second.dim || v.size() != first.dim) {
    fail(ErrorKind::kDimensionMismatch, "families and vector must share one dimension");
  }
  if (std::abs(first.period - second.period) > 1e-14 * first.period) {
    fail(ErrorKind::kDimensionMismatch, "families must share one period");
  }
  require_finite(v, "v");
  const EvolutionSystem r1(first, n);
  const EvolutionSystem r2(second, n);
  const Matrix g = first.metric_or_identity();
  Eigen::LLT<Matrix> llt(g);
  const Matrix lt = llt.matrixU();

  ContinuityGap gap{0.0, 0.0};
  const int stride = std::max(1, n / std::max(1, s_samples - 1));
  for (int l = 0; l < n; l += stride) {
    Vector y1 = v;
    Vector y2 = v;
    for (int k = l; k < n; ++k) {
      y1 = r1.apply(r1.node(k + 1), r1.node(k), y1);
      y2 = r2.apply(r2.node(k + 1), r2.node(k), y2);
      gap.lhs = std::max(gap.lhs, metric_norm(y1 - y2, g));
    }
  }

  const Matrix a0 = first.at(0.0);
  const Matrix graph = a0.transpose() * g * a0 + g;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(graph);
  const Matrix graph_inv_sqrt = eig.operatorInverseSqrt();
  const double v_norm = metric_norm(a0 * v, g) + metric_norm(v, g);
  const double h = first.period / n;
  double integral = 0.0;
  for (int j = 0; j < n; ++j) {
    const double t = first.period * j / n;
    integral += h * operator_norm(lt * (first.at(t) - second.at(t)) * graph_inv_sqrt);
  }
  gap.rhs = v_norm * integral;
  return gap;
}

}  // namespace evolver

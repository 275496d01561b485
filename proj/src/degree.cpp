#include "evolver/degree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "evolver/error.hpp"

namespace evolver {

namespace {

constexpr Eigen::Index kMaxDegreeDim = 4;

std::string format_point(const Vector& x) {
  std::ostringstream out;
  out.precision(6);
  out << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x(i);
  out << ")";
  return out.str();
}

void check_dim(Eigen::Index d) {
  if (d < 1 || d > kMaxDegreeDim) {
    fail(ErrorKind::kInvalidInput, "degree computations support 1 <= d <= 4, got " + std::to_string(d));
  }
}

void check_region_dim(Eigen::Index d) {
  if (d < 1 || d > kMaxDim) fail(ErrorKind::kInvalidInput, "region dimension out of range: " + std::to_string(d));
}

}  // namespace

Region Region::ball(Vector center, double radius) {
  check_region_dim(center.size());
  require_finite(center, "ball center");
  if (!(radius > 0.0) || !std::isfinite(radius)) fail(ErrorKind::kInvalidInput, "ball radius must be positive");
  Region r;
  r.kind_ = Kind::kBall;
  r.center_ = std::move(center);
  r.radius_ = radius;
  return r;
}

Region Region::box(Vector lower, Vector upper) {
  check_region_dim(lower.size());
  if (lower.size() != upper.size()) fail(ErrorKind::kDimensionMismatch, "box corners differ in dimension");
  require_finite(lower, "box corner");
  require_finite(upper, "box corner");
  if (!((upper - lower).array() > 0.0).all()) fail(ErrorKind::kInvalidInput, "box has empty interior");
  Region r;
  r.kind_ = Kind::kBox;
  r.center_ = 0.5 * (lower + upper);
  r.lower_ = std::move(lower);
  r.upper_ = std::move(upper);
  return r;
}

bool Region::contains(const Vector& x) const {
  if (x.size() != dim()) return false;
  if (kind_ == Kind::kBall) return (x - center_).norm() < radius_;
  return ((x - lower_).array() > 0.0).all() && ((upper_ - x).array() > 0.0).all();
}

Vector Region::bound_lower() const {
  return kind_ == Kind::kBall ? Vector(center_.array() - radius_) : lower_;
}

Vector Region::bound_upper() const {
  return kind_ == Kind::kBall ? Vector(center_.array() + radius_) : upper_;
}

Vector Region::boundary_point(double s) const {
  if (dim() != 2) fail(ErrorKind::kInvalidInput, "boundary parametrization is two-dimensional only");
  s -= std::floor(s);
  if (kind_ == Kind::kBall) {
    const double th = 2.0 * std::numbers::pi * s;
    return center_ + radius_ * Vector{{std::cos(th), std::sin(th)}};
  }
  const double w = upper_(0) - lower_(0);
  const double h = upper_(1) - lower_(1);
  double arc = s * 2.0 * (w + h);
  if (arc < w) return Vector{{lower_(0) + arc, lower_(1)}};
  arc -= w;
  if (arc < h) return Vector{{upper_(0), lower_(1) + arc}};
  arc -= h;
  if (arc < w) return Vector{{upper_(0) - arc, upper_(1)}};
  arc -= w;
  return Vector{{lower_(0), upper_(1) - arc}};
}

std::vector<Vector> Region::boundary_samples(int resolution) const {
  const Eigen::Index d = dim();
  check_dim(d);
  std::vector<Vector> out;
  if (d == 1) {
    out.push_back(bound_lower());
    out.push_back(bound_upper());
    return out;
  }
  if (d == 2) {
    for (int i = 0; i < resolution; ++i) out.push_back(boundary_point(static_cast<double>(i) / resolution));
    return out;
  }
  // Face grids of the unit cube, mapped to the box or projected to the sphere.
  const int edge = std::max(4, static_cast<int>(std::lround(std::pow(resolution, 1.0 / (d - 1)))));
  const int per_face = static_cast<int>(std::pow(edge, d - 1));
  for (Eigen::Index axis = 0; axis < d; ++axis) {
    for (int side = 0; side < 2; ++side) {
      for (int idx = 0; idx < per_face; ++idx) {
        Vector unit(d);
        int rest = idx;
        for (Eigen::Index k = 0; k < d; ++k) {
          if (k == axis) {
            unit(k) = side ? 1.0 : -1.0;
            continue;
          }
          unit(k) = -1.0 + 2.0 * (rest % edge) / (edge - 1);
          rest /= edge;
        }
        if (kind_ == Kind::kBall) {
          out.push_back(center_ + radius_ * unit.normalized());
        } else {
          out.push_back(lower_ + (0.5 * (unit.array() + 1.0) * (upper_ - lower_).array()).matrix());
        }
      }
    }
  }
  return out;
}

double require_admissible(const VectorField& g, const Region& region, int resolution) {
  double min_norm = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  Vector worst;
  for (const auto& x : region.boundary_samples(resolution)) {
    const Vector gx = g(x);
    if (gx.size() != region.dim()) fail(ErrorKind::kDimensionMismatch, "field and region differ in dimension");
    const double nrm = gx.norm();
    if (!std::isfinite(nrm)) fail(ErrorKind::kInvalidInput, "field is not finite at " + format_point(x));
    max_norm = std::max(max_norm, nrm);
    if (nrm < min_norm) {
      min_norm = nrm;
      worst = x;
    }
  }
  const double delta = 1e-6 * (1.0 + max_norm);
  if (min_norm <= delta) {
    std::ostringstream msg;
    msg << "field nearly vanishes on the boundary at " << format_point(worst) << " (|g| = " << min_norm
        << " <= delta = " << delta << ")";
    fail(ErrorKind::kInadmissibleRegion, msg.str());
  }
  return min_norm;
}

namespace {

Matrix central_jacobian(const VectorField& g, const Vector& x, double step) {
  const Eigen::Index d = x.size();
  Matrix jac(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Vector plus = x;
    Vector minus = x;
    plus(j) += step;
    minus(j) -= step;
    jac.col(j) = (g(plus) - g(minus)) / (2.0 * step);
  }
  return jac;
}

struct NewtonOutcome {
  bool converged;
  Vector point;
};

NewtonOutcome damped_newton(const VectorField& g, Vector x, const Region& region, double zero_tol,
                            const DegreeOptions& options) {
  const Vector lo = region.bound_lower();
  const Vector hi = region.bound_upper();
  const Vector pad = hi - lo;
  Vector gx = g(x);
  double res = gx.norm();
  for (int iter = 0; iter < options.newton_iter; ++iter) {
    if (res <= 1e-3 * zero_tol) break;
    const Matrix jac = central_jacobian(g, x, options.fd_step);
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible() || lu.rcond() < 1e-14) return {false, x};
    const Vector delta = -lu.solve(gx);
    double alpha = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving) {
      const Vector trial = x + alpha * delta;
      const Vector gt = g(trial);
      const double rt = gt.norm();
      if (std::isfinite(rt) && rt < res) {
        x = trial;
        gx = gt;
        res = rt;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) break;
    if (((x - lo).array() < -pad.array()).any() || ((x - hi).array() > pad.array()).any()) return {false, x};
    if (alpha * delta.norm() <= 1e-14 * (1.0 + x.norm())) break;
  }
  return {res <= zero_tol, x};
}

bool lexicographic_less(const FieldZero& a, const FieldZero& b) {
  for (Eigen::Index i = 0; i < a.point.size(); ++i) {
    if (a.point(i) != b.point(i)) return a.point(i) < b.point(i);
  }
  return false;
}

}  // namespace

DegreeResult brouwer_degree_detailed(const VectorField& g, const Region& region, const DegreeOptions& options) {
  const Eigen::Index d = region.dim();
  check_dim(d);
  DegreeResult result;
  result.boundary_min = require_admissible(g, region, options.boundary_resolution);

  double scale = 0.0;
  for (const auto& x : region.boundary_samples(options.boundary_resolution)) scale = std::max(scale, g(x).norm());
  const double zero_tol = 1e-9 * (1.0 + scale);

  const Vector lo = region.bound_lower();
  const Vector hi = region.bound_upper();
  const int grid = std::max(1, options.grid);
  long total = 1;
  for (Eigen::Index k = 0; k < d; ++k) total *= grid;

  std::vector<Vector> zeros;
  for (long idx = 0; idx < total; ++idx) {
    Vector start(d);
    long rest = idx;
    for (Eigen::Index k = 0; k < d; ++k) {
      start(k) = lo(k) + (hi(k) - lo(k)) * ((rest % grid) + 0.5) / grid;
      rest /= grid;
    }
    if (!region.contains(start)) continue;
    const NewtonOutcome outcome = damped_newton(g, start, region, zero_tol, options);
    if (!outcome.converged || !region.contains(outcome.point)) continue;
    const bool known = std::any_of(zeros.begin(), zeros.end(), [&](const Vector& z) {
      return (z - outcome.point).norm() <= options.cluster_radius * (1.0 + z.norm());
    });
    if (!known) zeros.push_back(outcome.point);
  }

  for (const auto& z : zeros) {
    const double det = central_jacobian(g, z, options.fd_step).determinant();
    if (std::abs(det) < 1e-8) {
      std::ostringstream msg;
      msg << "zero at " << format_point(z) << " has |det Dg| = " << std::abs(det)
          << " < 1e-8; the regular-value degree is undefined";
      fail(ErrorKind::kDegenerateZero, msg.str());
    }
    result.zeros.push_back({z, det});
  }
  std::sort(result.zeros.begin(), result.zeros.end(), lexicographic_less);
  for (const auto& z : result.zeros) result.degree += z.jacobian_det > 0.0 ? 1 : -1;
  return result;
}

int brouwer_degree(const VectorField& g, const Region& region, const DegreeOptions& options) {
  return brouwer_degree_detailed(g, region, options).degree;
}

int winding_number_2d(const VectorField& g, const Region& region, int samples) {
  if (region.dim() != 2) fail(ErrorKind::kInvalidInput, "winding number needs a planar region");
  if (samples < 4) samples = 4;
  constexpr long kMaxSamples = 1L << 20;
  if (samples > kMaxSamples) fail(ErrorKind::kOracleFailure, "winding sample count exceeds 2^20");
  const double half_pi = 0.5 * std::numbers::pi;

  auto eval = [&](double s) {
    const Vector v = g(region.boundary_point(s));
    if (v.size() != 2) fail(ErrorKind::kDimensionMismatch, "planar field must return 2-vectors");
    return v;
  };
  std::vector<Vector> initial;
  double max_norm = 0.0;
  for (int i = 0; i <= samples; ++i) {
    initial.push_back(i == samples ? initial.front() : eval(static_cast<double>(i) / samples));
    max_norm = std::max(max_norm, initial.back().norm());
  }
  const double delta = 1e-6 * (1.0 + max_norm);
  auto check = [&](const Vector& v, double s) {
    if (v.norm() <= delta) {
      fail(ErrorKind::kInadmissibleRegion,
           "field nearly vanishes on the boundary at " + format_point(region.boundary_point(s)));
    }
  };

  long used = samples;
  double total_angle = 0.0;
  struct Segment {
    double s0, s1;
    Vector g0, g1;
  };
  std::vector<Segment> stack;
  for (int i = samples - 1; i >= 0; --i) {
    check(initial[i], static_cast<double>(i) / samples);
    stack.push_back({static_cast<double>(i) / samples, static_cast<double>(i + 1) / samples, initial[i],
                     initial[i + 1]});
  }
  while (!stack.empty()) {
    Segment seg = std::move(stack.back());
    stack.pop_back();
    const double cross = seg.g0(0) * seg.g1(1) - seg.g0(1) * seg.g1(0);
    const double dot = seg.g0.dot(seg.g1);
    const double angle = std::atan2(cross, dot);
    if (std::abs(angle) < half_pi) {
      total_angle += angle;
      continue;
    }
    if (++used > kMaxSamples) fail(ErrorKind::kOracleFailure, "winding refinement exceeded 2^20 samples");
    const double mid = 0.5 * (seg.s0 + seg.s1);
    Vector gm = eval(mid);
    check(gm, mid);
    stack.push_back({mid, seg.s1, gm, seg.g1});
    stack.push_back({seg.s0, mid, seg.g0, std::move(gm)});
  }
  const double turns = total_angle / (2.0 * std::numbers::pi);
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 1e-6) {
    fail(ErrorKind::kOracleFailure, "accumulated argument is not an integer multiple of 2 pi");
  }
  return static_cast<int>(rounded);
}

int deg_hat(const Matrix& a_hat, const VectorField& f_hat, const Region& region, const DegreeOptions& options) {
  // A^{-1} = -(0 I - A)^{-1}
  const Matrix a_inv = -resolvent(a_hat, 0.0);
  const VectorField field = [a_inv, f_hat](const Vector& x) { return Vector(x + a_inv * f_hat(x)); };
  return brouwer_degree(field, region, options);
}

}  // namespace evolver

#pragma once

// Brouwer degree of continuous vector fields on balls and boxes (d <= 4) by
// the regular-value method, with a boundary winding-number oracle in d = 2.

#include <functional>
#include <vector>

#include "evolver/linop.hpp"

namespace evolver {

using VectorField = std::function<Vector(const Vector&)>;

/// Open ball or open box in R^d.
class Region {
 public:
  enum class Kind { kBall, kBox };

  static Region ball(Vector center, double radius);
  static Region box(Vector lower, Vector upper);

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return center_.size(); }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  bool contains(const Vector& x) const;  ///< strict interior
  /// Bounding box of the region.
  Vector bound_lower() const;
  Vector bound_upper() const;
  /// Deterministic samples of the boundary; `resolution` points per
  /// boundary curve in d = 2, per face edge in d >= 3.
  std::vector<Vector> boundary_samples(int resolution) const;
  /// Boundary point for s in [0, 1), counter-clockwise; d = 2 only.
  Vector boundary_point(double s) const;

 private:
  Kind kind_ = Kind::kBall;
  Vector center_;
  double radius_ = 0.0;
  Vector lower_;
  Vector upper_;
};

struct DegreeOptions {
  int grid = 16;  ///< Newton starts per dimension
  double fd_step = 1e-6;
  double cluster_radius = 1e-6;
  int boundary_resolution = 256;
  int newton_iter = 100;
};

struct FieldZero {
  Vector point;
  double jacobian_det;
};

struct DegreeResult {
  int degree = 0;
  std::vector<FieldZero> zeros;  ///< sorted lexicographically
  double boundary_min = 0.0;     ///< min ||g|| over boundary samples
};

/// min ||g|| over boundary samples; throws inadmissible-region naming the
/// offending sample when it is below delta = 1e-6 (1 + max boundary ||g||).
double require_admissible(const VectorField& g, const Region& region, int resolution);

/// Regular-value degree: multi-start damped Newton, zeros clustered, signs of
/// central-difference Jacobian determinants summed. A zero with
/// |det Dg| < 1e-8 raises degenerate-zero.
DegreeResult brouwer_degree_detailed(const VectorField& g, const Region& region,
                                     const DegreeOptions& options = {});
int brouwer_degree(const VectorField& g, const Region& region, const DegreeOptions& options = {});

/// Accumulated argument of g along the boundary divided by 2 pi, refining any
/// step whose angle increment reaches pi/2. Oracle-failure past 2^20 samples.
int winding_number_2d(const VectorField& g, const Region& region, int samples = 256);

/// deg(I + A^{-1} F, U) for invertible A; singular A propagates singular-resolvent.
int deg_hat(const Matrix& a_hat, const VectorField& f_hat, const Region& region,
            const DegreeOptions& options = {});

}  // namespace evolver

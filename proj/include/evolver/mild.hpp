#pragma once

// Variation-of-constants operator, mild solutions by Picard iteration, and
// the translation-along-trajectories operator Phi_t of u' = lambda (A(t) u + F(t, u)).

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "evolver/evolsys.hpp"
#include "evolver/random.hpp"

namespace evolver {

/// F(t, x) with the sampled constants of its Lipschitz and linear-growth bounds.
struct NonlinearField {
  Eigen::Index dim = 0;
  std::function<Vector(double t, const Vector& x)> eval;
  double lipschitz = 0.0;
  double growth = 0.0;  ///< ||F(t, x)|| <= growth (1 + ||x||)
  bool periodic = true;
  double period = 1.0;

  Vector operator()(double t, const Vector& x) const { return eval(t, x); }
};

NonlinearField zero_field(Eigen::Index dim, double period);

struct FieldReport {
  double max_lipschitz_ratio = 0.0;  ///< max sampled ||F(t,x1)-F(t,x2)|| / ||x1-x2||
  double max_growth_ratio = 0.0;     ///< max sampled ||F(t,x)|| / (1 + ||x||)
  double periodicity_gap = 0.0;
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
};

/// Random-sample checks of the Lipschitz, growth and periodicity hypotheses
/// on the box [-radius, radius]^d.
FieldReport validate(const NonlinearField& field, Rng& rng, int samples = 200, double radius = 10.0);

/// Uniform time grid with `intervals` cells on [start, stop].
struct TimeGrid {
  double start = 0.0;
  double stop = 1.0;
  int intervals = 2048;

  int nodes() const { return intervals + 1; }
  double step() const { return (stop - start) / intervals; }
  double at(int i) const { return i == intervals ? stop : start + step() * i; }
};

struct Trajectory {
  TimeGrid grid;
  std::vector<Vector> states;
  double lambda = 0.0;
  int iterations = 0;     ///< Picard sweeps performed
  double residual = 0.0;  ///< sup-norm of the last Picard update

  const Vector& final_state() const { return states.back(); }
};

/// An evolution system restricted to a trajectory grid: caches the transfer
/// matrices R(t_{i+1}, t_i) so repeated solves cost O(m d^2).
class Propagator {
 public:
  Propagator(EvolutionSystem evolution, TimeGrid grid);

  const EvolutionSystem& evolution() const { return evolution_; }
  const TimeGrid& grid() const { return grid_; }
  const Matrix& transfer(int i) const { return transfer_[i]; }
  Eigen::Index dim() const { return evolution_.family().dim; }

 private:
  EvolutionSystem evolution_;
  TimeGrid grid_;
  std::vector<Matrix> transfer_;
};

/// t -> R(t, t0) x + int_{t0}^t R(t, s) w(s) ds on the grid, composite
/// trapezoid for the integral. `forcing` holds w at every grid node.
Trajectory sigma_apply(const Propagator& propagator, const Vector& x, std::span<const Vector> forcing);
Trajectory sigma_apply(const EvolutionSystem& r, const Vector& x, std::span<const Vector> forcing,
                       const TimeGrid& grid);

struct MildOptions {
  int grid = 2048;
  double tol = 1e-10;
  int max_iter = 200;
};

/// Fixed point of u -> Sigma(x0, lambda F(., u(.))) on the propagator's grid.
/// The evolution system must be the one generated by the lambda-scaled family.
/// Throws divergence after `max_iter` sweeps.
Trajectory mild_solve(const Propagator& propagator, const NonlinearField& field, const Vector& x0,
                      double lambda, const MildOptions& options = {});
Trajectory mild_solve(const EvolutionSystem& r, const NonlinearField& field, const Vector& x0,
                      double lambda, const MildOptions& options = {});

/// Phi_t(x): the mild solution started at x, read at time t.
Vector translate(const EvolutionSystem& r, const NonlinearField& field, double t, const Vector& x,
                 double lambda, const MildOptions& options = {});

/// Phi_T^(lambda) for u' = lambda (A(t) u + F(t, u)) with the evolution system
/// and trajectory transfers built once.
class TranslationOperator {
 public:
  TranslationOperator(const GeneratorFamily& family, NonlinearField field, double lambda, int n,
                      MildOptions options = {});

  Vector operator()(const Vector& x) const { return trajectory(x).final_state(); }
  Trajectory trajectory(const Vector& x) const;

  double lambda() const { return lambda_; }
  Eigen::Index dim() const { return propagator_.dim(); }
  const Propagator& propagator() const { return propagator_; }
  const NonlinearField& field() const { return field_; }

 private:
  Propagator propagator_;
  NonlinearField field_;
  double lambda_;
  MildOptions options_;
};

enum class FixedPointMethod { kPicard, kNewton };

struct FixedPointOptions {
  double tol = 1e-8;
  int max_iter = 60;          ///< Newton iterations
  int max_picard_iter = 5000; ///< iterations of x <- Phi(x)
  double fd_step = 1e-6;
};

struct FixedPointResult {
  Vector point;
  double residual;  ///< ||Phi(x*) - x*||
  int iterations;
};

/// Solves Phi(x) = x. Newton uses a central-difference Jacobian of Phi and
/// backtracking; a singular Jacobian raises degenerate-fixed-point, missing
/// the tolerance raises divergence.
FixedPointResult fixed_point(const std::function<Vector(const Vector&)>& map, const Vector& x_init,
                             FixedPointMethod method = FixedPointMethod::kNewton,
                             const FixedPointOptions& options = {});

}  // namespace evolver

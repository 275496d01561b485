#pragma once

// Two-parameter evolution systems R(t, s) of time-dependent generator
// families, realized by the frozen-coefficient product formula on a uniform
// grid t_j = j T / n.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evolver/linop.hpp"

namespace evolver {

/// t -> A(t) on [0, T] with a claimed dissipativity rate `omega` in the
/// metric G (identity when absent).
struct GeneratorFamily {
  Eigen::Index dim = 0;
  std::function<Matrix(double)> generator;
  double period = 1.0;
  double omega = 0.0;
  std::optional<Matrix> metric;
  bool periodic = true;
  bool differentiable = false;

  Matrix at(double t) const { return generator(t); }
  Matrix metric_or_identity() const;
};

struct FamilyReport {
  double periodicity_gap = 0.0;  ///< ||A(0) - A(T)||
  double min_rate = 0.0;         ///< min over the grid of dissipativity_rate(A(t), G)
  double coarse_modulus = 0.0;   ///< max ||A(t) - A(t')|| at spacing T/64
  double fine_modulus = 0.0;     ///< same at spacing T/1024
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
};

/// Samples the periodicity, stability and continuity hypotheses.
FamilyReport validate(const GeneratorFamily& family);
/// Throws precondition naming the first violated hypothesis.
void require_valid(const GeneratorFamily& family);

GeneratorFamily constant_family(const Matrix& a, double period,
                                std::optional<Matrix> metric = std::nullopt);
/// lambda * A(t); the rate scales with lambda.
GeneratorFamily scaled(const GeneratorFamily& family, double lambda);
/// A(t) + B(t) with the rate recomputed on the sampling grid.
GeneratorFamily perturbed(const GeneratorFamily& family, std::function<Matrix(double)> extra);

/// Immutable discretized evolution system R_n(t, s). Step factors
/// S_j(T/n) = exp((T/n) A(t_j)) and prefix products R_n(t_j, 0) are cached at
/// build time; queries are pure.
class EvolutionSystem {
 public:
  static constexpr int kMaxSubdivisions = 1 << 14;

  /// Throws resource-guard when n > 2^14.
  EvolutionSystem(GeneratorFamily family, int n);

  const GeneratorFamily& family() const { return family_; }
  int subdivisions() const { return n_; }
  double period() const { return family_.period; }
  double node(int j) const { return family_.period * j / n_; }

  /// R_n(t, s) for 0 <= s <= t <= T; ordering error otherwise.
  Matrix operator()(double t, double s) const;
  /// R_n(t, s) x at O(n d^2) cost (O(d^2) plus one partial step when s = 0).
  Vector apply(double t, double s, const Vector& x) const;
  /// R_n(T, 0).
  const Matrix& monodromy() const { return prefix_.back(); }

 private:
  struct Position {
    int cell;
    double offset;
  };
  Position locate(double t) const;
  Matrix partial(int cell, double tau) const;
  void check_order(double t, double s) const;

  GeneratorFamily family_;
  int n_;
  double h_;
  std::vector<Matrix> frozen_;  // A(t_j), j < n
  std::vector<Matrix> steps_;   // exp(h A(t_j)), j < n
  std::vector<Matrix> prefix_;  // R_n(t_j, 0), j <= n
};

EvolutionSystem build_evolution(const GeneratorFamily& family, int n);
Vector evolution_apply(const EvolutionSystem& r, double t, double s, const Vector& x);

/// ||R(t, s) - R(t, r) R(r, s)|| for s <= r <= t.
double cocycle_defect(const EvolutionSystem& r, double t, double mid, double s);

/// max over sampled s < t of ||R(t, s)||_G e^{omega (t - s)} - 1, with the
/// samples a uniform grid of `samples` points on [0, T].
double contraction_check(const EvolutionSystem& r, double omega, int samples = 11);

struct ContinuityGap {
  double lhs;  ///< max over sampled (t, s) of ||R1(t, s) v - R2(t, s) v||
  double rhs;  ///< ||v||_V * integral of ||A1 - A2||_{L(V, E)} (frozen Riemann sum)
};

/// Both sides of the parameter-continuity estimate with M = M_V = 1 and zero
/// growth exponents. Norms are taken in the metric of `first`; the V-norm is
/// ||A1(0) v|| + ||v|| and ||B||_{L(V,E)} is bounded above through the graph
/// norm (||A1(0) v||^2 + ||v||^2)^{1/2}.
ContinuityGap family_continuity_gap(const GeneratorFamily& first, const GeneratorFamily& second,
                                    int n, const Vector& v, int s_samples = 17);

}  // namespace evolver

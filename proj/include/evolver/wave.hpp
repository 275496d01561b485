#pragma once

// Spectral Galerkin model of the damped wave equation
//   u_tt + beta(t) u_t + A u + f(t, u) = 0
// on (0, ell) with Dirichlet conditions, truncated to the first k eigenmodes.
// States are z = (a, b) with u = sum a_i e_i, u_t = sum b_i e_i.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "evolver/averaging.hpp"
#include "evolver/mild.hpp"

namespace evolver {

struct WaveParams {
  double ell = 3.14159265358979323846;
  int k = 1;
  std::optional<std::vector<double>> eigenvalues;  ///< replaces (i pi / ell)^2 when given
  std::function<double(double)> beta;              ///< damping, T-periodic, >= beta_0 > 0
  std::function<double(double, double)> f;         ///< f(t, s); zero when empty
  double lipschitz = 0.0;                          ///< L
  double growth = 0.0;                             ///< c with |f(t, s)| <= c (1 + |s|)
  double f_inf = 0.0;                              ///< lim f(t, s) / s as |s| -> infinity
  std::optional<double> eta;                       ///< chosen by select_eta when absent
  double period = 2.0 * 3.14159265358979323846;
  std::optional<Matrix> coupling;  ///< damping block -beta(t) C instead of -beta(t) I
  bool check_resonance = true;
  int collocation = 0;  ///< interior nodes for the nonlinearity, 4k when 0
};

struct EtaChoice {
  double eta = 0.0;
  double analytic_rate = 0.0;  ///< min(eta/2, beta_0 - eta - eta gamma^2 / 2)
  double numeric_rate = 0.0;   ///< min over t of the dissipativity rate in the eta metric
  double beta_min = 0.0;
  double gamma = 0.0;          ///< max_t (beta(t) + 1) / sqrt(lambda_1)
};

class WaveModel {
 public:
  explicit WaveModel(const WaveParams& params);

  int modes() const { return k_; }
  Eigen::Index dim() const { return 2 * k_; }
  double ell() const { return ell_; }
  double period() const { return period_; }
  const Vector& eigenvalues() const { return eigs_; }
  double beta(double t) const { return beta_(t); }
  double f(double t, double s) const { return f_ ? f_(t, s) : 0.0; }
  double f_inf() const { return f_inf_; }
  double lipschitz() const { return lipschitz_; }
  double growth() const { return growth_; }
  double eta() const { return eta_; }
  double beta_min() const { return beta_min_; }
  double beta_max() const { return beta_max_; }
  const std::optional<Matrix>& coupling() const { return coupling_; }
  /// min_i |lambda_i + f_inf|; zero means Au + f_inf u has a kernel.
  double resonance_gap() const;

  /// [[0, I], [-Lambda, -beta(t) I]] (or -beta(t) C).
  Matrix generator(double t) const;
  /// G with z1^T G z2 = (u1, u2)_{1/2} + (v1 + eta u1, v2 + eta u2)_0.
  Matrix metric(double eta) const;
  Matrix metric() const { return metric(eta_); }
  /// P_k f(t, u) for u = sum a_i e_i, by collocation and discrete sine projection.
  Vector project_nonlinearity(double t, const Vector& a) const;
  /// (0, -P_k f(t, u)).
  Vector field(double t, const Vector& z) const;
  /// 1/2 (|u|_{1/2}^2 + |v|_0^2).
  double energy(const Vector& z) const;
  /// Values u(x_j) at the collocation nodes.
  Vector collocate(const Vector& a) const { return samples_ * a; }
  const Vector& nodes() const { return nodes_; }

  void set_eta(double eta) { eta_ = eta; }

 private:
  int k_;
  double ell_;
  double period_;
  Vector eigs_;
  std::function<double(double)> beta_;
  std::function<double(double, double)> f_;
  double lipschitz_;
  double growth_;
  double f_inf_;
  double eta_ = 0.0;
  double beta_min_ = 0.0;
  double beta_max_ = 0.0;
  std::optional<Matrix> coupling_;
  Vector nodes_;
  Matrix samples_;     // S_ji = e_i(x_j)
  Matrix projection_;  // P = (ell / (m + 1)) S^T, P S = I
};

struct WaveSystem {
  WaveModel model;
  GeneratorFamily family;  ///< metric G_eta, omega the numeric rate
  NonlinearField field;
  EtaChoice eta;
};

/// Validates the parameters (configuration errors name the violated
/// condition), picks eta and emits the family and lifted nonlinearity.
WaveSystem build_wave_model(const WaveParams& params);

double eta_inner(const Vector& z1, const Vector& z2, const WaveModel& model);
double eta_inner(const Vector& z1, const Vector& z2, const WaveModel& model, double eta);

/// Golden-section maximization of the analytic rate, plus the numeric rate in
/// the resulting metric. Throws configuration when no eta gives a positive rate.
EtaChoice select_eta(const WaveModel& model);

/// lambda F(t_i, z_i) at every node of a trajectory.
std::vector<Vector> wave_forcing(const WaveModel& model, const Trajectory& traj, double lambda = 1.0);

/// Max over interior nodes of |dE/dt - (-lambda beta |v|^2 + (w_v, v))| with
/// dE/dt by central differences and w the forcing used by the solve.
double energy_residual(const Trajectory& traj, const WaveModel& model, std::span<const Vector> forcing,
                       double lambda = 1.0);

/// max_j ||R'(t, s) E e_j - E R(t, s) e_j|| with E the mode embedding.
double spectral_invariance_gap(const EvolutionSystem& small, const EvolutionSystem& large, double t, double s);
double spectral_invariance_gap(const WaveSystem& small, const WaveSystem& large, double t, double s,
                               int n = 4096);

struct NondegeneracyRow {
  double lambda = 0.0;
  double distance_to_one = 0.0;
  double spectral_radius = 0.0;
  bool nondegenerate = false;
};

struct NondegeneracyReport {
  std::vector<NondegeneracyRow> rows;
  double averaged_det = 0.0;   ///< det(A_hat + F_inf)
  double averaged_smin = 0.0;  ///< smallest singular value of A_hat + F_inf
  bool kernel_trivial = false;
  bool nondegenerate = false;
};

/// F_inf(a, b) = (0, -f_inf a).
Matrix asymptotic_linearization(const WaveModel& model);

NondegeneracyReport linear_nondegeneracy(const WaveSystem& system, const std::vector<double>& lambdas,
                                         int n = 2048);

struct PeriodicWave {
  Trajectory trajectory;
  Vector x;
  double residual = 0.0;  ///< ||z(0) - z(T)|| in the eta metric
  int newton_iters = 0;
};

struct PeriodicOptions {
  int n = 4096;
  MildOptions mild{2048, 1e-12, 400};
  FixedPointOptions fixed_point{1e-10, 60, 5000, 1e-6};
};

/// Fixed point of Phi_T^(lambda) for the Galerkin system; divergence when the
/// eta-norm closure gap exceeds 1e-6.
PeriodicWave find_periodic_wave(const WaveSystem& system, double lambda, const Vector& x_init,
                                const PeriodicOptions& options = {});

}  // namespace evolver

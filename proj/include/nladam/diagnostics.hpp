#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nladam/adam.hpp"
#include "nladam/dynamics.hpp"
#include "nladam/numerics.hpp"
#include "nladam/objective.hpp"
#include "nladam/solver.hpp"
#include "nladam/trajectory.hpp"

namespace nladam {

inline constexpr double kResidualSlack = 1e-12;
inline constexpr double kEnvelopeWindow = 0.1;
inline constexpr double kTailFraction = 0.1;
inline constexpr double kBasinThreshold = 0.1;

/// f at the critical point closest to the final state of the trajectory.
double nearest_critical_value(const Trajectory& traj, double c);

/// Phi(t_n) = f(theta_n) - f_star, projected onto Phi >= 0.
/// Throws if f_star exceeds the trajectory minimum by more than kResidualSlack.
ScalarSeries residual_series(const Trajectory& traj, const Objective& objective, double f_star);

/// V = Phi + (mu / (2 lambda1)) |M1|^2 with mu = eta / (sqrt(M2) + eps), using
/// first-order moments of the trajectory. The series starts at the first node
/// with t >= t_from; t_from below alpha is rejected.
ScalarSeries lyapunov_series(const Trajectory& traj, const AdamHyperParams& hp, const Objective& objective,
                             double f_star, std::optional<double> t_from = {});

/// env(t) <= A exp(-omega (t - delta)) + B on [delta, T].
struct FitResult {
  double A = 0.0;
  double omega = 0.0;
  double B = 0.0;
  std::size_t violations = 0;
  double delta = 0.0;
  double tail_start = 0.0;
  double window = 0.0;
  std::size_t used_points = 0;  // points entering the log-linear fit
  bool usable = false;

  double bound(double t) const;
};

FitResult fit_envelope_bound(const ScalarSeries& phi, double delta, double window = kEnvelopeWindow,
                             double tail_fraction = kTailFraction);

/// Grid points of env on [delta, T] above the fitted bound.
std::size_t bound_violations(const ScalarSeries& env, const FitResult& fit);

struct ErrorScalingRow {
  double alpha = 0.0;
  DynamicsKind model = DynamicsKind::FirstOrder;
  double u0 = 0.0;
  double E_T = 0.0;
  double E_fT = 0.0;
  bool converged = true;  // continuous run reached the solver tolerance
};

/// Discrepancy of the two trajectories at t = floor(T / alpha) alpha, where
/// alpha is the coarser of the two matched-time spacings. Symmetric.
ErrorScalingRow final_time_errors(const Trajectory& a, const Trajectory& b, const Objective& objective,
                                  double T);

/// State at time t: the node value when t sits on the grid, cubic interpolation otherwise.
Vec state_at(const Trajectory& traj, double t);

/// Rows for every alpha: the first-order model, then the second-order model for each u0.
/// Sorted by alpha, then model, then u0.
std::vector<ErrorScalingRow> error_scaling_sweep(const std::vector<double>& alphas, const AdamHyperParams& hp,
                                                 double c, double theta0, const std::vector<double>& u0s,
                                                 double T, const SolverConfig& config = {});

struct ScalingSlopes {
  LogLogFit theta;   // E_T against alpha
  LogLogFit value;   // E_fT against alpha
  double ratio = 0.0;
};

ScalingSlopes scaling_slopes(const std::vector<ErrorScalingRow>& rows, DynamicsKind model, double u0);

/// Critical point within threshold of theta, if any.
std::optional<CriticalPoint> classify_basin(double theta, double c, double threshold = kBasinThreshold);

struct BasinRow {
  double alpha = 0.0;
  double final_discrete = 0.0;
  double final_second = 0.0;
  std::optional<double> basin_discrete;
  std::optional<double> basin_second;
  bool converged = false;
  double t_end = 0.0;
};

/// Horizon used when the scan is not given one: long enough for discrete Adam to settle.
double basin_horizon(double alpha);

std::vector<BasinRow> basin_scan(const std::vector<double>& alphas, const AdamHyperParams& hp, double c,
                                 double theta0, double u0, std::optional<double> t_end = {},
                                 const SolverConfig& config = {});

struct VelocityRow {
  double alpha = 0.0;
  double u0 = 0.0;
  double delta_theta = 0.0;
  double delta_phi = 0.0;
  bool converged = true;
};

/// Post-transient sup discrepancies of second-order runs against the u0_ref run,
/// over matched times in [delta, t_end]. Sorted by alpha, then u0.
std::vector<VelocityRow> velocity_sensitivity(const std::vector<double>& alphas, const std::vector<double>& u0s,
                                              double u0_ref, double delta, const AdamHyperParams& hp, double c,
                                              double theta0, double t_end, const SolverConfig& config = {});

/// Sup discrepancy of two trajectories on a shared grid over matched times in [delta, T].
VelocityRow trajectory_discrepancy(const Trajectory& a, const Trajectory& ref, const Objective& objective,
                                   double delta);

/// rho = max{alpha, (alpha / (1 - beta1))^2, alpha / (1 - beta2)}.
double perturbation_scale(const AdamHyperParams& hp);

}  // namespace nladam

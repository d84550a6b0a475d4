#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nladam/adam.hpp"
#include "nladam/moments.hpp"
#include "nladam/objective.hpp"
#include "nladam/solver.hpp"
#include "nladam/trajectory.hpp"

namespace nladam {

enum class DynamicsKind { FirstOrder, SecondOrder };

const char* to_string(DynamicsKind kind);

struct DynamicsSpec {
  DynamicsKind kind = DynamicsKind::SecondOrder;
  AdamHyperParams hp;
  Objective objective;
  std::optional<Vec> u0;  // second order only; zero when unset
  KernelOrder moment_order = KernelOrder::Second;
  /// evaluate the forcing at t + alpha (as in the model) or at t
  bool shifted_forcing = true;

  static DynamicsSpec first_order(AdamHyperParams hp, Objective objective);
  static DynamicsSpec second_order(AdamHyperParams hp, Objective objective, std::optional<Vec> u0 = {});

  void validate() const;
};

struct DynamicsResult {
  Trajectory trajectory;
  ConvergenceReport report;
  bool stable_regime = true;        // beta1 <= sqrt(beta2)
  bool positivity_enforced = false;  // v was clipped in the converged forcing
  std::vector<std::string> warnings;
};

/// Grid nodes per alpha actually used for a given model and config.
int resolved_substeps(DynamicsKind kind, const SolverConfig& config);

/// Fixed-point problem whose solution is the requested continuous flow on [0, t_end].
FixedPointProblem make_problem(const DynamicsSpec& spec, const Vec& theta0, double t_end,
                               const SolverConfig& config);

DynamicsResult run_dynamics(const DynamicsSpec& spec, const Vec& theta0, double t_end,
                            const SolverConfig& config = {});

/// theta' = -eta(t+alpha) m1(t+alpha) / (sqrt(v1(t+alpha)) + eps(t+alpha)).
DynamicsResult run_first_order(const Vec& theta0, const AdamHyperParams& hp, const Objective& objective,
                               double t_end, const SolverConfig& config = {});

/// theta' = u, u' = (2/alpha)(-eta(t+alpha) T(theta, t+alpha) - u) with second-order kernels.
DynamicsResult run_second_order(const Vec& theta0, const Vec& u0, const AdamHyperParams& hp,
                                const Objective& objective, double t_end,
                                const SolverConfig& config = {});

/// u'(t_n) = (2/alpha)(-forcing_n - u_n) from the stored records.
std::vector<Vec> acceleration_series(const Trajectory& traj, const AdamHyperParams& hp);

}  // namespace nladam

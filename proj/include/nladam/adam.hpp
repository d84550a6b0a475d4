#pragma once

#include <cstddef>
#include <vector>

#include "nladam/linalg.hpp"
#include "nladam/objective.hpp"
#include "nladam/trajectory.hpp"

namespace nladam {

/// Stepsize alpha (also the physical time per iteration), decay factors and stabilizer.
struct AdamHyperParams {
  double alpha = 1e-3;
  double beta1 = 0.99;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
  /// beta1 <= sqrt(beta2), the compatibility condition of the stability analysis.
  bool is_stable_regime() const;

  bool operator==(const AdamHyperParams&) const = default;
};

enum class AdamMode { Coordinatewise, Isotropic };

/// Iterate of Algorithm-1 Adam. In isotropic mode v holds a single entry.
struct AdamState {
  std::size_t k = 0;
  Vec theta;
  Vec m;
  Vec v;

  static AdamState initial(Vec theta0, AdamMode mode);
};

struct AdamStepRecord {
  Vec m;
  Vec v;
  Vec m_hat;
  Vec v_hat;
  Vec g;  // gradient evaluated at the previous iterate
};

AdamState adam_step(const AdamState& state, const AdamHyperParams& hp, const Objective& objective,
                    AdamMode mode, AdamStepRecord* record = nullptr);

struct AdamRun {
  Trajectory trajectory;             // nodes k = 0..K on t_k = k alpha
  std::vector<AdamStepRecord> steps; // steps[k-1] describes the update producing theta_k
  bool stable_regime = true;
};

AdamRun adam_run(const Vec& theta0, std::size_t iterations, const AdamHyperParams& hp,
                 const Objective& objective, AdamMode mode = AdamMode::Isotropic);

/// K = floor(T / alpha), tolerant to rounding in T / alpha.
std::size_t iterations_for_horizon(double t_end, double alpha);

const char* to_string(AdamMode mode);

}  // namespace nladam

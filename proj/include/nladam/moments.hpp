#pragma once

#include <cstddef>
#include <vector>

#include "nladam/adam.hpp"
#include "nladam/kernels.hpp"
#include "nladam/linalg.hpp"
#include "nladam/objective.hpp"
#include "nladam/trajectory.hpp"

namespace nladam {

/// Which memory kernel family produces the continuous moments:
/// First = lambda e^{-lambda tau}, Second = ((1 - beta)/alpha) K_beta.
enum class KernelOrder { First, Second };

const char* to_string(KernelOrder order);

inline constexpr int kDefaultQuadNodes = 1000;

struct VectorMoment {
  Vec value;
  bool clamped = false;
};

struct ScalarMoment {
  double value = 0.0;  // max(0, raw)
  double raw = 0.0;    // before projection onto v >= 0
  bool clamped = false;

  bool clipped() const { return raw < 0.0; }
};

// Direct evaluation of the causal convolutions at a single time t by
// composite Gauss-Legendre quadrature. Panels follow the trajectory grid
// cells; theta(t - tau) comes from cubic interpolation of the samples.
// quad_nodes is the total node budget (at least 6 nodes per cell are used).
VectorMoment moment_m(const Trajectory& traj, const AdamHyperParams& hp, const Objective& objective,
                      double t, KernelOrder order, int quad_nodes = kDefaultQuadNodes);
ScalarMoment moment_v(const Trajectory& traj, const AdamHyperParams& hp, const Objective& objective,
                      double t, KernelOrder order, int quad_nodes = kDefaultQuadNodes);

/// eta(t) = sqrt(1 - beta2^{t/alpha}) / (1 - beta1^{t/alpha}), t > 0.
double bias_eta(double t, const AdamHyperParams& hp);
/// eps(t) = epsilon sqrt(1 - beta2^{t/alpha}), t > 0.
double bias_eps(double t, const AdamHyperParams& hp);

/// T(t) = m(t) / (sqrt(v(t)) + eps(t)) with both moments from the same kernel order.
Vec normalized_force(const Trajectory& traj, const AdamHyperParams& hp, const Objective& objective,
                     double t, KernelOrder order, int quad_nodes = kDefaultQuadNodes);

/// Moments at every node of a uniform grid.
struct MomentSeries {
  double t0 = 0.0;
  double h = 1.0;
  KernelOrder order = KernelOrder::First;
  StateSeries m;
  std::vector<double> v;      // projected onto v >= 0
  std::vector<double> v_raw;
  std::size_t clip_events = 0;

  std::size_t size() const { return v.size(); }
  double time(std::size_t i) const { return t0 + h * static_cast<double>(i); }
};

inline constexpr int kDefaultNodesPerCell = 8;

/// Grid-wide moments via the exact cell-to-cell recursion of the exponential
/// (or damped-oscillator) kernels, using the same piecewise-cubic interpolant
/// of theta as the direct route. O(N) in the number of grid nodes.
MomentSeries moment_series(const StateSeries& theta, double t0, double h, const AdamHyperParams& hp,
                           const Objective& objective, KernelOrder order,
                           int nodes_per_cell = kDefaultNodesPerCell);

MomentSeries moment_series(const Trajectory& traj, const AdamHyperParams& hp,
                           const Objective& objective, KernelOrder order,
                           int nodes_per_cell = kDefaultNodesPerCell);

/// (1 - beta1)^2 / ((1 - beta2)(1 + beta2 - 2 beta1)): the first/second
/// moment comparison constant. Only meaningful when beta1 <= sqrt(beta2).
double moment_comparison_constant(const AdamHyperParams& hp);

}  // namespace nladam

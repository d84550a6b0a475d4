#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nladam/linalg.hpp"
#include "nladam/numerics.hpp"

namespace nladam {

/// Per-node diagnostics recorded alongside a trajectory.
struct NodeRecord {
  Vec m;               // first moment
  double v = 0.0;      // second moment (isotropic; coordinatewise runs store the sum)
  double f = 0.0;      // objective at the node state
  double grad_norm = 0.0;
  double eta = 0.0;    // bias-correction factor at the node time
  double eps_t = 0.0;  // time-dependent stabilizer at the node time
  Vec forcing;         // frozen forcing used by the final local integration (continuous runs)
};

/// Uniformly gridded time series of the state, with optional velocity.
struct Trajectory {
  double t0 = 0.0;
  double h = 1.0;
  std::vector<Vec> theta;
  std::optional<std::vector<Vec>> u;
  std::vector<NodeRecord> records;
  /// grid nodes per stepsize alpha; node k * stride sits at matched time k alpha
  std::size_t stride = 1;

  std::size_t size() const { return theta.size(); }
  std::size_t dim() const { return theta.empty() ? 0 : theta.front().size(); }
  double time(std::size_t i) const { return t0 + h * static_cast<double>(i); }
  double t_end() const { return time(size() == 0 ? 0 : size() - 1); }
  bool is_matched_time(std::size_t i) const { return i % stride == 0; }

  GridSeries theta_series() const { return GridSeries{t0, h, theta}; }
  StateSeries theta_states() const;
  /// theta at time t by cubic interpolation (clamped outside the grid).
  Vec theta_at(double t) const;
};

}  // namespace nladam

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nladam/linalg.hpp"

namespace nladam {

struct SolverConfig {
  double tol = 1e-4;
  int max_iter = 1000;
  double relax_init = 0.5;
  double relax_max = 0.9999;
  double relax_increment = 5e-4;
  int quad_nodes = 1000;
  /// grid nodes per stepsize alpha; unset means 5 for second-order and 1 for first-order dynamics
  std::optional<int> substeps;

  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

struct ConvergenceReport {
  int iterations = 0;
  double final_error = 0.0;
  bool converged = false;
  double relax_final = 0.0;
  std::size_t clip_events_final = 0;
  bool exited_at_relax_max = false;
  std::vector<double> error_history;
  std::vector<double> relax_history;
  std::vector<std::size_t> clip_history;
};

/// Frozen nonlocal term evaluated on the grid from a guess trajectory.
struct ForcingSeries {
  StateSeries values;  // one row per grid node
  std::size_t clip_events = 0;
};

/// A memory-driven ODE y' = rhs(t, y, F(t)) on a uniform grid, where the
/// forcing F depends on the whole trajectory through a nonlocal operator.
struct FixedPointProblem {
  double t0 = 0.0;
  double h = 1.0;
  std::size_t steps = 0;  // grid has steps + 1 nodes
  Vec y0;
  std::size_t forcing_dim = 0;
  std::function<void(double t, std::span<const double> y, std::span<const double> forcing,
                     std::span<double> dydt)>
      rhs;
  std::function<ForcingSeries(const StateSeries& guess)> forcing;
};

/// Thrown when an iterate contains NaN or Inf.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::size_t index)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Explicit Euler with the forcing frozen at the grid nodes.
StateSeries integrate_local(const FixedPointProblem& problem, const StateSeries& forcing);

/// Sum over nodes and components of squared differences.
double squared_l2_difference(const StateSeries& a, const StateSeries& b);

struct SolveResult {
  StateSeries states;
  StateSeries forcing;  // forcing that produced `states`
  ConvergenceReport report;
};

/// Relaxed Picard iteration (the modified IDESolver loop). Non-convergence is
/// reported, not thrown.
SolveResult picard_solve(const FixedPointProblem& problem, const SolverConfig& config);

}  // namespace nladam

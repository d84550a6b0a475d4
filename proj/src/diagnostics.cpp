#include "nladam/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "nladam/moments.hpp"

namespace nladam {

namespace {

constexpr double kGridTol = 1e-9;  // relative to h when snapping times to nodes
constexpr double kLogFloor = 1e-15;

std::size_t first_node_at_or_after(double t0, double h, double t) {
  const double x = (t - t0) / h;
  if (x <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(x - kGridTol));
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double matched_spacing(const Trajectory& traj) { return traj.h * static_cast<double>(traj.stride); }

}  // namespace

double nearest_critical_value(const Trajectory& traj, double c) {
  if (traj.size() == 0) throw std::invalid_argument("nearest_critical_value: empty trajectory");
  const double theta = traj.theta.back().at(0);
  double best = std::numeric_limits<double>::infinity();
  double value = 0.0;
  for (const auto& cp : rosenbrock_critical_points(c)) {
    if (cp.kind == CriticalKind::Maximum) continue;
    if (std::abs(cp.theta - theta) < best) {
      best = std::abs(cp.theta - theta);
      value = rosenbrock_eval(cp.theta, c);
    }
  }
  return value;
}

ScalarSeries residual_series(const Trajectory& traj, const Objective& objective, double f_star) {
  ScalarSeries phi{traj.t0, traj.h, std::vector<double>(traj.size())};
  double fmin = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < traj.size(); ++n) {
    phi.values[n] = objective.value(traj.theta[n]);
    fmin = std::min(fmin, phi.values[n]);
  }
  if (f_star > fmin + kResidualSlack) {
    throw std::invalid_argument("residual_series: f_star lies above the trajectory minimum of f");
  }
  for (double& x : phi.values) x = std::max(0.0, x - f_star);
  return phi;
}

ScalarSeries lyapunov_series(const Trajectory& traj, const AdamHyperParams& hp, const Objective& objective,
                             double f_star, std::optional<double> t_from) {
  hp.validate();
  const double start = t_from.value_or(hp.alpha);
  if (start < hp.alpha * (1.0 - kGridTol)) {
    throw std::invalid_argument("lyapunov_series: V is only defined for t >= alpha");
  }
  const ScalarSeries phi = residual_series(traj, objective, f_star);
  const MomentSeries ms = moment_series(traj, hp, objective, KernelOrder::First);
  const double lambda1 = (1.0 - hp.beta1) / hp.alpha;

  const std::size_t first = first_node_at_or_after(traj.t0, traj.h, start);
  if (first >= traj.size()) throw std::invalid_argument("lyapunov_series: t_from beyond the trajectory");
  ScalarSeries V{traj.time(first), traj.h, {}};
  V.values.reserve(traj.size() - first);
  for (std::size_t n = first; n < traj.size(); ++n) {
    const double t = traj.time(n);
    const double mu = bias_eta(t, hp) / (std::sqrt(ms.v[n]) + bias_eps(t, hp));
    V.values.push_back(phi.values[n] + mu / (2.0 * lambda1) * norm_sq(ms.m[n]));
  }
  return V;
}

double FitResult::bound(double t) const { return A * std::exp(-omega * (t - delta)) + B; }

FitResult fit_envelope_bound(const ScalarSeries& phi, double delta, double window, double tail_fraction) {
  if (phi.size() < 2) throw std::invalid_argument("fit_envelope_bound: series too short");
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
    throw std::invalid_argument("fit_envelope_bound: tail_fraction must lie in (0, 1)");
  }
  const double T = phi.t_end();
  if (!(delta >= phi.t0 && delta < T)) throw std::invalid_argument("fit_envelope_bound: delta outside the series");

  FitResult fit;
  fit.delta = delta;
  fit.window = window;
  fit.tail_start = T - tail_fraction * (T - phi.t0);
  const ScalarSeries env = running_envelope(phi, window);

  const std::size_t tail = first_node_at_or_after(phi.t0, phi.h, fit.tail_start);
  if (tail >= env.size()) throw std::invalid_argument("fit_envelope_bound: empty tail window");
  fit.B = median({env.values.begin() + static_cast<std::ptrdiff_t>(tail), env.values.end()});

  // log(env - B) = a - omega (t - delta) by least squares on [delta, tail_start]
  const std::size_t lo = first_node_at_or_after(phi.t0, phi.h, delta);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = lo; i < tail; ++i) {
    const double y = env.values[i] - fit.B;
    if (y <= kLogFloor) continue;
    const double x = env.time(i) - delta;
    const double ly = std::log(y);
    sx += x;
    sy += ly;
    sxx += x * x;
    sxy += x * ly;
    ++n;
  }
  fit.used_points = n;
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  if (n >= 2 && denom > 0.0) {
    const double slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
    fit.omega = std::max(0.0, -slope);
  }

  for (std::size_t i = lo; i < env.size(); ++i) {
    const double excess = env.values[i] - fit.B;
    fit.A = std::max(fit.A, excess * std::exp(fit.omega * (env.time(i) - delta)));
  }
  fit.usable = n >= 2 && fit.omega > 0.0 && fit.A > 0.0;
  if (fit.A <= 0.0) fit.A = std::numeric_limits<double>::min();

  // rounding in A e^{-omega s} can undercut env by an ulp
  while ((fit.violations = bound_violations(env, fit)) > 0) fit.A *= 1.0 + 1e-12;
  return fit;
}

std::size_t bound_violations(const ScalarSeries& env, const FitResult& fit) {
  std::size_t count = 0;
  for (std::size_t i = first_node_at_or_after(env.t0, env.h, fit.delta); i < env.size(); ++i) {
    if (env.values[i] > fit.bound(env.time(i))) ++count;
  }
  return count;
}

Vec state_at(const Trajectory& traj, double t) {
  if (traj.size() == 0) throw std::invalid_argument("state_at: empty trajectory");
  const double x = (t - traj.t0) / traj.h;
  const double k = std::round(x);
  if (x < -kGridTol || k > static_cast<double>(traj.size() - 1) + kGridTol) {
    throw std::invalid_argument("state_at: time outside the trajectory");
  }
  if (std::abs(x - k) <= kGridTol) return traj.theta[static_cast<std::size_t>(k)];
  return traj.theta_at(t);
}

ErrorScalingRow final_time_errors(const Trajectory& a, const Trajectory& b, const Objective& objective,
                                  double T) {
  const double alpha = std::max(matched_spacing(a), matched_spacing(b));
  const double t = static_cast<double>(iterations_for_horizon(T, alpha)) * alpha;
  for (const Trajectory* tr : {&a, &b}) {
    if (tr->t_end() < t - kGridTol * tr->h || tr->t0 > t) {
      throw std::invalid_argument("final_time_errors: trajectory does not cover the horizon");
    }
  }
  const Vec xa = state_at(a, t);
  const Vec xb = state_at(b, t);
  ErrorScalingRow row;
  row.alpha = alpha;
  row.E_T = distance(xa, xb);
  row.E_fT = std::abs(objective.value(xa) - objective.value(xb));
  return row;
}

std::vector<ErrorScalingRow> error_scaling_sweep(const std::vector<double>& alphas, const AdamHyperParams& hp,
                                                 double c, double theta0, const std::vector<double>& u0s,
                                                 double T, const SolverConfig& config) {
  const Objective obj = make_rosenbrock({c});
  std::vector<ErrorScalingRow> rows;
  for (double alpha : alphas) {
    AdamHyperParams p = hp;
    p.alpha = alpha;
    const AdamRun discrete = adam_run({theta0}, iterations_for_horizon(T, alpha), p, obj);

    const auto first = run_first_order({theta0}, p, obj, T, config);
    ErrorScalingRow row = final_time_errors(discrete.trajectory, first.trajectory, obj, T);
    row.alpha = alpha;
    row.model = DynamicsKind::FirstOrder;
    row.converged = first.report.converged;
    rows.push_back(row);

    for (double u0 : u0s) {
      const auto second = run_second_order({theta0}, {u0}, p, obj, T, config);
      row = final_time_errors(discrete.trajectory, second.trajectory, obj, T);
      row.alpha = alpha;
      row.model = DynamicsKind::SecondOrder;
      row.u0 = u0;
      row.converged = second.report.converged;
      rows.push_back(row);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ErrorScalingRow& x, const ErrorScalingRow& y) {
    return std::make_tuple(x.alpha, static_cast<int>(x.model), x.u0) <
           std::make_tuple(y.alpha, static_cast<int>(y.model), y.u0);
  });
  return rows;
}

ScalingSlopes scaling_slopes(const std::vector<ErrorScalingRow>& rows, DynamicsKind model, double u0) {
  std::vector<std::pair<double, double>> theta, value;
  for (const auto& r : rows) {
    if (r.model != model) continue;
    if (model == DynamicsKind::SecondOrder && r.u0 != u0) continue;
    // exact zeros carry no slope information
    if (r.E_T > 0.0) theta.emplace_back(r.alpha, r.E_T);
    if (r.E_fT > 0.0) value.emplace_back(r.alpha, r.E_fT);
  }
  ScalingSlopes s;
  s.theta = loglog_slope(theta);
  s.value = loglog_slope(value);
  s.ratio = s.value.slope / s.theta.slope;
  return s;
}

std::optional<CriticalPoint> classify_basin(double theta, double c, double threshold) {
  std::optional<CriticalPoint> best;
  for (const auto& cp : rosenbrock_critical_points(c)) {
    if (!best || std::abs(cp.theta - theta) < std::abs(best->theta - theta)) best = cp;
  }
  if (best && std::abs(best->theta - theta) <= threshold) return best;
  return std::nullopt;
}

double basin_horizon(double alpha) { return std::max(1.5, 1000.0 * alpha); }

std::vector<BasinRow> basin_scan(const std::vector<double>& alphas, const AdamHyperParams& hp, double c,
                                 double theta0, double u0, std::optional<double> t_end,
                                 const SolverConfig& config) {
  if (!std::is_sorted(alphas.begin(), alphas.end())) {
    throw std::invalid_argument("basin_scan: alpha list must be sorted");
  }
  const Objective obj = make_rosenbrock({c});
  std::vector<BasinRow> rows;
  for (double alpha : alphas) {
    AdamHyperParams p = hp;
    p.alpha = alpha;
    BasinRow row;
    row.alpha = alpha;
    row.t_end = t_end.value_or(basin_horizon(alpha));
    const AdamRun discrete = adam_run({theta0}, iterations_for_horizon(row.t_end, alpha), p, obj);
    const auto second = run_second_order({theta0}, {u0}, p, obj, row.t_end, config);
    row.final_discrete = discrete.trajectory.theta.back()[0];
    row.final_second = second.trajectory.theta.back()[0];
    row.converged = second.report.converged;
    if (auto cp = classify_basin(row.final_discrete, c)) row.basin_discrete = cp->theta;
    if (auto cp = classify_basin(row.final_second, c)) row.basin_second = cp->theta;
    rows.push_back(row);
  }
  return rows;
}

VelocityRow trajectory_discrepancy(const Trajectory& a, const Trajectory& ref, const Objective& objective,
                                   double delta) {
  if (a.size() != ref.size() || a.h != ref.h || a.t0 != ref.t0 || a.stride != ref.stride) {
    throw std::invalid_argument("trajectory_discrepancy: trajectories live on different grids");
  }
  VelocityRow row;
  for (std::size_t n = first_node_at_or_after(a.t0, a.h, delta); n < a.size(); ++n) {
    if (!a.is_matched_time(n)) continue;
    row.delta_theta = std::max(row.delta_theta, distance(a.theta[n], ref.theta[n]));
    row.delta_phi = std::max(row.delta_phi, std::abs(objective.value(a.theta[n]) - objective.value(ref.theta[n])));
  }
  return row;
}

std::vector<VelocityRow> velocity_sensitivity(const std::vector<double>& alphas, const std::vector<double>& u0s,
                                              double u0_ref, double delta, const AdamHyperParams& hp, double c,
                                              double theta0, double t_end, const SolverConfig& config) {
  if (!(delta < t_end)) throw std::invalid_argument("velocity_sensitivity: need delta < t_end");
  const Objective obj = make_rosenbrock({c});
  std::vector<VelocityRow> rows;
  for (double alpha : alphas) {
    AdamHyperParams p = hp;
    p.alpha = alpha;
    const auto ref = run_second_order({theta0}, {u0_ref}, p, obj, t_end, config);
    for (double u0 : u0s) {
      VelocityRow row;
      if (u0 != u0_ref) {
        const auto run = run_second_order({theta0}, {u0}, p, obj, t_end, config);
        row = trajectory_discrepancy(run.trajectory, ref.trajectory, obj, delta);
        row.converged = run.report.converged;
      }
      row.converged = row.converged && ref.report.converged;
      row.alpha = alpha;
      row.u0 = u0;
      rows.push_back(row);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const VelocityRow& x, const VelocityRow& y) {
    return std::make_pair(x.alpha, x.u0) < std::make_pair(y.alpha, y.u0);
  });
  return rows;
}

double perturbation_scale(const AdamHyperParams& hp) {
  if (!(hp.beta1 < 1.0 && hp.beta2 < 1.0)) throw std::invalid_argument("perturbation_scale: need beta < 1");
  const double r = hp.alpha / (1.0 - hp.beta1);
  return std::max({hp.alpha, r * r, hp.alpha / (1.0 - hp.beta2)});
}

}  // namespace nladam

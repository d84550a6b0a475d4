#include "nladam/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nladam {

const char* to_string(DynamicsKind kind) {
  return kind == DynamicsKind::FirstOrder ? "first-order" : "second-order";
}

DynamicsSpec DynamicsSpec::first_order(AdamHyperParams hp, Objective objective) {
  return DynamicsSpec{DynamicsKind::FirstOrder, hp, std::move(objective), std::nullopt,
                      KernelOrder::First, true};
}

DynamicsSpec DynamicsSpec::second_order(AdamHyperParams hp, Objective objective, std::optional<Vec> u0) {
  return DynamicsSpec{DynamicsKind::SecondOrder, hp, std::move(objective), std::move(u0),
                      KernelOrder::Second, true};
}

void DynamicsSpec::validate() const {
  hp.validate();
  if (kind == DynamicsKind::FirstOrder) {
    if (u0) throw std::invalid_argument("first-order dynamics take no initial velocity");
    if (moment_order != KernelOrder::First) {
      throw std::invalid_argument("first-order dynamics use first-order moments");
    }
  }
  if (u0 && u0->size() != objective.dimension()) {
    throw std::invalid_argument("u0 dimension does not match the objective");
  }
}

int resolved_substeps(DynamicsKind kind, const SolverConfig& config) {
  if (config.substeps) return *config.substeps;
  return kind == DynamicsKind::SecondOrder ? 5 : 1;
}

namespace {

std::size_t grid_steps(double t_end, double h) {
  return static_cast<std::size_t>(std::floor(t_end / h + 1e-9));
}

StateSeries theta_part(const StateSeries& y, std::size_t dim) {
  if (y.dim() == dim) return y;
  StateSeries out(y.size(), dim);
  for (std::size_t n = 0; n < y.size(); ++n) {
    auto src = y[n];
    auto dst = out[n];
    for (std::size_t d = 0; d < dim; ++d) dst[d] = src[d];
  }
  return out;
}

// G_n = eta(t_n) T(t_n); G at t = 0 is zero (both moments vanish there).
StateSeries scaled_force(const MomentSeries& ms, const AdamHyperParams& hp) {
  const std::size_t dim = ms.m.dim();
  StateSeries g(ms.size(), dim);
  for (std::size_t n = 0; n < ms.size(); ++n) {
    const double t = ms.time(n);
    if (t <= 0.0) continue;
    const double scale = bias_eta(t, hp) / (std::sqrt(ms.v[n]) + bias_eps(t, hp));
    auto m = ms.m[n];
    auto out = g[n];
    for (std::size_t d = 0; d < dim; ++d) out[d] = scale * m[d];
  }
  return g;
}

}  // namespace

FixedPointProblem make_problem(const DynamicsSpec& spec, const Vec& theta0, double t_end,
                               const SolverConfig& config) {
  spec.validate();
  config.validate();
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  const std::size_t dim = spec.objective.dimension();
  if (theta0.size() != dim) throw std::invalid_argument("theta0 dimension does not match the objective");

  const int substeps = resolved_substeps(spec.kind, config);
  const double alpha = spec.hp.alpha;
  const double h = alpha / substeps;
  const std::size_t steps = grid_steps(t_end, h);
  if (steps == 0) throw std::invalid_argument("t_end is shorter than one grid step");

  FixedPointProblem p;
  p.t0 = 0.0;
  p.h = h;
  p.steps = steps;
  p.forcing_dim = dim;
  const bool second = spec.kind == DynamicsKind::SecondOrder;
  p.y0 = theta0;
  if (second) {
    const Vec u0 = spec.u0.value_or(Vec(dim, 0.0));
    p.y0.insert(p.y0.end(), u0.begin(), u0.end());
    p.rhs = [dim, alpha](double, std::span<const double> y, std::span<const double> f,
                         std::span<double> dydt) {
      for (std::size_t d = 0; d < dim; ++d) {
        dydt[d] = y[dim + d];
        dydt[dim + d] = (2.0 / alpha) * (-f[d] - y[dim + d]);
      }
    };
  } else {
    p.rhs = [dim](double, std::span<const double>, std::span<const double> f, std::span<double> dydt) {
      for (std::size_t d = 0; d < dim; ++d) dydt[d] = -f[d];
    };
  }

  // alpha is a whole number of grid steps, so t + alpha is a grid node and the
  // shifted query needs no interpolation; past the horizon it clamps.
  const std::size_t shift = spec.shifted_forcing ? static_cast<std::size_t>(substeps) : 0;
  const AdamHyperParams hp = spec.hp;
  const Objective objective = spec.objective;
  const KernelOrder order = spec.moment_order;
  p.forcing = [=](const StateSeries& guess) {
    const MomentSeries ms = moment_series(theta_part(guess, dim), 0.0, h, hp, objective, order);
    const StateSeries g = scaled_force(ms, hp);
    ForcingSeries out{StateSeries(g.size(), dim), 0};
    const std::size_t last = g.size() - 1;
    for (std::size_t n = 0; n < g.size(); ++n) {
      const std::size_t src = std::min(n + shift, last);
      auto from = g[src];
      auto to = out.values[n];
      std::copy(from.begin(), from.end(), to.begin());
      if (ms.v_raw[src] < 0.0) ++out.clip_events;
    }
    return out;
  };
  return p;
}

DynamicsResult run_dynamics(const DynamicsSpec& spec, const Vec& theta0, double t_end,
                            const SolverConfig& config) {
  const FixedPointProblem problem = make_problem(spec, theta0, t_end, config);
  SolveResult solved = picard_solve(problem, config);

  const std::size_t dim = spec.objective.dimension();
  const bool second = spec.kind == DynamicsKind::SecondOrder;
  const int substeps = resolved_substeps(spec.kind, config);

  DynamicsResult out;
  out.report = std::move(solved.report);
  out.stable_regime = spec.hp.is_stable_regime();
  if (!out.stable_regime) out.warnings.push_back("beta1 > sqrt(beta2): outside the stable regime");
  if (second && substeps == 1) {
    out.warnings.push_back("substeps=1 puts the velocity relaxation at amplification factor -1");
  }
  if (!out.report.converged) out.warnings.push_back("Picard iteration did not reach the tolerance");
  out.positivity_enforced = out.report.clip_events_final > 0;
  if (out.positivity_enforced) out.warnings.push_back("positivity-enforced: v was clipped at convergence");

  Trajectory& traj = out.trajectory;
  traj.t0 = problem.t0;
  traj.h = problem.h;
  traj.stride = static_cast<std::size_t>(substeps);
  const StateSeries& y = solved.states;
  traj.theta.reserve(y.size());
  if (second) traj.u.emplace().reserve(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) {
    auto row = y[n];
    traj.theta.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(dim));
    if (second) traj.u->emplace_back(row.begin() + static_cast<std::ptrdiff_t>(dim), row.end());
  }

  const MomentSeries ms = moment_series(theta_part(y, dim), traj.t0, traj.h, spec.hp, spec.objective,
                                        spec.moment_order);
  traj.records.resize(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) {
    NodeRecord& rec = traj.records[n];
    auto m = ms.m[n];
    rec.m.assign(m.begin(), m.end());
    rec.v = ms.v[n];
    rec.f = spec.objective.value(traj.theta[n]);
    rec.grad_norm = norm(spec.objective.gradient(traj.theta[n]));
    const double t = std::max(traj.time(n), spec.hp.alpha);
    rec.eta = bias_eta(t, spec.hp);
    rec.eps_t = bias_eps(t, spec.hp);
    auto f = solved.forcing[n];
    rec.forcing.assign(f.begin(), f.end());
  }
  return out;
}

DynamicsResult run_first_order(const Vec& theta0, const AdamHyperParams& hp, const Objective& objective,
                               double t_end, const SolverConfig& config) {
  return run_dynamics(DynamicsSpec::first_order(hp, objective), theta0, t_end, config);
}

DynamicsResult run_second_order(const Vec& theta0, const Vec& u0, const AdamHyperParams& hp,
                                const Objective& objective, double t_end, const SolverConfig& config) {
  return run_dynamics(DynamicsSpec::second_order(hp, objective, u0), theta0, t_end, config);
}

std::vector<Vec> acceleration_series(const Trajectory& traj, const AdamHyperParams& hp) {
  if (!traj.u) throw std::invalid_argument("acceleration_series: trajectory has no velocity");
  if (traj.records.size() != traj.size()) {
    throw std::invalid_argument("acceleration_series: trajectory has no forcing records");
  }
  std::vector<Vec> acc(traj.size());
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const Vec& u = (*traj.u)[n];
    const Vec& f = traj.records[n].forcing;
    if (f.size() != u.size()) throw std::invalid_argument("acceleration_series: missing forcing record");
    acc[n].resize(u.size());
    for (std::size_t d = 0; d < u.size(); ++d) acc[n][d] = (2.0 / hp.alpha) * (-f[d] - u[d]);
  }
  return acc;
}

}  // namespace nladam

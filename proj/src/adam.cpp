#include "nladam/adam.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nladam/moments.hpp"

namespace nladam {

void AdamHyperParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

bool AdamHyperParams::is_stable_regime() const { return beta1 <= std::sqrt(beta2); }

AdamState AdamState::initial(Vec theta0, AdamMode mode) {
  AdamState s;
  const std::size_t n = theta0.size();
  s.theta = std::move(theta0);
  s.m.assign(n, 0.0);
  s.v.assign(mode == AdamMode::Isotropic ? 1 : n, 0.0);
  return s;
}

AdamState adam_step(const AdamState& state, const AdamHyperParams& hp, const Objective& objective,
                    AdamMode mode, AdamStepRecord* record) {
  const std::size_t n = state.theta.size();
  AdamState next = state;
  next.k = state.k + 1;
  const Vec g = objective.gradient(state.theta);

  const double k = static_cast<double>(next.k);
  const double c1 = 1.0 - std::pow(hp.beta1, k);
  const double c2 = 1.0 - std::pow(hp.beta2, k);

  for (std::size_t i = 0; i < n; ++i) next.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g[i];
  if (mode == AdamMode::Isotropic) {
    next.v[0] = hp.beta2 * state.v[0] + (1.0 - hp.beta2) * norm_sq(g);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      next.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g[i] * g[i];
    }
  }

  Vec m_hat(n), v_hat(next.v.size());
  for (std::size_t i = 0; i < n; ++i) m_hat[i] = next.m[i] / c1;
  for (std::size_t i = 0; i < v_hat.size(); ++i) v_hat[i] = next.v[i] / c2;

  for (std::size_t i = 0; i < n; ++i) {
    const double scale = mode == AdamMode::Isotropic ? v_hat[0] : v_hat[i];
    next.theta[i] = state.theta[i] - hp.alpha * m_hat[i] / (std::sqrt(scale) + hp.epsilon);
  }

  if (record) {
    record->m = next.m;
    record->v = next.v;
    record->m_hat = std::move(m_hat);
    record->v_hat = std::move(v_hat);
    record->g = g;
  }
  return next;
}

std::size_t iterations_for_horizon(double t_end, double alpha) {
  if (!(t_end >= 0.0) || !(alpha > 0.0)) throw std::invalid_argument("invalid horizon");
  return static_cast<std::size_t>(std::floor(t_end / alpha + 1e-9));
}

AdamRun adam_run(const Vec& theta0, std::size_t iterations, const AdamHyperParams& hp,
                 const Objective& objective, AdamMode mode) {
  hp.validate();
  if (theta0.size() != objective.dimension()) {
    throw std::invalid_argument("adam_run: theta0 dimension does not match the objective");
  }
  AdamRun run;
  run.stable_regime = hp.is_stable_regime();
  Trajectory& traj = run.trajectory;
  traj.t0 = 0.0;
  traj.h = hp.alpha;
  traj.stride = 1;
  traj.theta.reserve(iterations + 1);
  traj.records.reserve(iterations + 1);
  run.steps.reserve(iterations);

  auto record_node = [&](const AdamState& s) {
    NodeRecord rec;
    rec.m = s.m;
    rec.v = std::accumulate(s.v.begin(), s.v.end(), 0.0);
    rec.f = objective.value(s.theta);
    rec.grad_norm = norm(objective.gradient(s.theta));
    const double t = std::max(static_cast<double>(s.k), 1.0) * hp.alpha;
    rec.eta = bias_eta(t, hp);
    rec.eps_t = bias_eps(t, hp);
    traj.theta.push_back(s.theta);
    traj.records.push_back(std::move(rec));
  };

  AdamState state = AdamState::initial(theta0, mode);
  record_node(state);
  for (std::size_t k = 0; k < iterations; ++k) {
    AdamStepRecord step;
    state = adam_step(state, hp, objective, mode, &step);
    run.steps.push_back(std::move(step));
    record_node(state);
  }
  return run;
}

const char* to_string(AdamMode mode) {
  return mode == AdamMode::Isotropic ? "isotropic" : "coordinatewise";
}

}  // namespace nladam

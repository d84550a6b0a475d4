#include "nladam/solver.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace nladam {

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("solver: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("solver: max_iter must be positive");
  if (!(relax_init > 0.0 && relax_init <= relax_max && relax_max < 1.0)) {
    throw std::invalid_argument("solver: need 0 < relax_init <= relax_max < 1");
  }
  if (!(relax_increment > 0.0)) throw std::invalid_argument("solver: relax_increment must be positive");
  if (quad_nodes < 1) throw std::invalid_argument("solver: quad_nodes must be positive");
  if (substeps && *substeps < 1) throw std::invalid_argument("solver: substeps must be positive");
}

namespace {

void check_finite(const StateSeries& s, const char* what) {
  const auto& raw = s.raw();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      const std::size_t node = s.dim() == 0 ? 0 : i / s.dim();
      throw SolverError(std::string(what) + " is not finite at grid index " + std::to_string(node),
                        node);
    }
  }
}

StateSeries blend(double a, const StateSeries& x, const StateSeries& y) {
  StateSeries out = x;
  auto& o = out.raw();
  const auto& yr = y.raw();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a * o[i] + (1.0 - a) * yr[i];
  return out;
}

}  // namespace

StateSeries integrate_local(const FixedPointProblem& problem, const StateSeries& forcing) {
  const std::size_t dim = problem.y0.size();
  StateSeries y(problem.steps + 1, dim);
  std::copy(problem.y0.begin(), problem.y0.end(), y[0].begin());
  Vec dydt(dim);
  for (std::size_t n = 0; n < problem.steps; ++n) {
    const double t = problem.t0 + problem.h * static_cast<double>(n);
    problem.rhs(t, y[n], forcing[n], dydt);
    auto cur = y[n];
    auto next = y[n + 1];
    for (std::size_t d = 0; d < dim; ++d) next[d] = cur[d] + problem.h * dydt[d];
  }
  return y;
}

double squared_l2_difference(const StateSeries& a, const StateSeries& b) {
  const auto& x = a.raw();
  const auto& y = b.raw();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

SolveResult picard_solve(const FixedPointProblem& problem, const SolverConfig& config) {
  config.validate();
  if (!(problem.h > 0.0)) throw std::invalid_argument("picard_solve: h must be positive");
  if (problem.steps == 0) throw std::invalid_argument("picard_solve: empty time grid");
  if (!problem.rhs || !problem.forcing) throw std::invalid_argument("picard_solve: incomplete problem");

  ConvergenceReport report;
  double relax = config.relax_init;

  // Image of an input trajectory under one freeze-and-integrate sweep.
  struct Image {
    StateSeries states;
    StateSeries forcing;
    std::size_t clips = 0;
  };
  auto sweep = [&](const StateSeries& input) {
    ForcingSeries f = problem.forcing(input);
    check_finite(f.values, "forcing");
    Image img{integrate_local(problem, f.values), std::move(f.values), f.clip_events};
    check_finite(img.states, "iterate");
    return img;
  };
  auto record = [&](double error, std::size_t clips) {
    report.error_history.push_back(error);
    report.relax_history.push_back(relax);
    report.clip_history.push_back(clips);
    ++report.iterations;
  };

  // guess: the local ODE with the nonlocal term dropped; current: its image
  const StateSeries zero(problem.steps + 1, problem.forcing_dim);
  StateSeries guess = integrate_local(problem, zero);
  check_finite(guess, "initial guess");

  Image first = sweep(guess);
  StateSeries current = std::move(first.states);
  double error = squared_l2_difference(current, guess);
  record(error, first.clips);

  // the returned solution is the latest image; before the loop runs that is `current`
  StateSeries solution = current;
  StateSeries solution_forcing = std::move(first.forcing);
  std::size_t solution_clips = first.clips;

  double best_error = error;
  StateSeries best = solution;
  StateSeries best_forcing = solution_forcing;
  std::size_t best_clips = solution_clips;

  while (error > config.tol && report.iterations < config.max_iter) {
    const StateSeries relaxed = blend(relax, current, guess);
    Image img = sweep(relaxed);
    guess = std::move(img.states);
    const double new_error = squared_l2_difference(relaxed, guess);

    solution = guess;
    solution_forcing = std::move(img.forcing);
    solution_clips = img.clips;
    if (new_error < best_error) {
      best_error = new_error;
      best = solution;
      best_forcing = solution_forcing;
      best_clips = solution_clips;
    }

    if (new_error > error) {
      if (relax >= config.relax_max) {
        record(new_error, img.clips);
        report.exited_at_relax_max = true;
        break;
      }
      relax = std::min(relax + config.relax_increment, config.relax_max);
    }
    current = relaxed;
    error = new_error;
    record(error, img.clips);
  }

  SolveResult result;
  if (report.exited_at_relax_max) {
    result.states = std::move(best);
    result.forcing = std::move(best_forcing);
    report.final_error = best_error;
    report.clip_events_final = best_clips;
  } else {
    result.states = std::move(solution);
    result.forcing = std::move(solution_forcing);
    report.final_error = report.error_history.back();
    report.clip_events_final = solution_clips;
  }
  report.relax_final = relax;
  report.converged = report.error_history.back() <= config.tol;
  result.report = std::move(report);
  return result;
}

}  // namespace nladam

#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "nladam/solver.hpp"

using namespace nladam;

namespace {

// y' = -y + int_0^t e^{-(t-s)} y(s) ds; forcing F = -(memory integral), rhs = -y - F.
// The memory integral of the piecewise-linear iterate is propagated exactly cell by cell.
FixedPointProblem linear_ide(double h, double t_end) {
  FixedPointProblem p;
  p.h = h;
  p.steps = static_cast<std::size_t>(std::llround(t_end / h));
  p.y0 = {1.0};
  p.forcing_dim = 1;
  p.rhs = [](double, std::span<const double> y, std::span<const double> f, std::span<double> dy) {
    dy[0] = -y[0] - f[0];
  };
  p.forcing = [h](const StateSeries& y) {
    ForcingSeries out{StateSeries(y.size(), 1), 0};
    const double e = std::exp(-h);
    // weights of y_n (left) and y_{n+1} (right) in int_0^h e^{-(h-s)} y(s) ds for linear y
    const double w_right = (h - 1 + e) / h;
    const double w_left = (1 - e) - w_right;
    double z = 0.0;
    for (std::size_t n = 0; n + 1 < y.size(); ++n) {
      z = e * z + w_left * y[n][0] + w_right * y[n + 1][0];
      out.values[n + 1][0] = -z;
    }
    return out;
  };
  return p;
}

// brute-force oracle: explicit Euler on the coupled local system (y, z), z' = y - z
double dense_oracle(double t, double h) {
  double y = 1.0, z = 0.0;
  const auto n = static_cast<std::size_t>(std::llround(t / h));
  for (std::size_t i = 0; i < n; ++i) {
    const double dy = -y + z, dz = y - z;
    y += h * dy;
    z += h * dz;
  }
  return y;
}

}  // namespace

TEST_CASE("config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.relax_init = 0.95;
  c.relax_max = 0.9;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  SolverConfig d;
  d.tol = 0;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  SolverConfig e;
  e.relax_max = 1.0;
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);
}

TEST_CASE("local Euler integration") {
  FixedPointProblem p;
  p.h = 0.1;
  p.steps = 10;
  p.y0 = {2.0, -1.0};
  p.forcing_dim = 1;
  p.rhs = [](double, std::span<const double>, std::span<const double>, std::span<double> dy) {
    dy[0] = 0.0;
    dy[1] = 0.0;
  };
  const StateSeries zero(11, 1);
  const StateSeries y = integrate_local(p, zero);
  for (std::size_t n = 0; n < y.size(); ++n) {
    CHECK(y[n][0] == 2.0);
    CHECK(y[n][1] == -1.0);
  }

  // velocity relaxation u' = (2/alpha)(-0 - u): factor 1 - 2h/alpha per step
  const double alpha = 1e-2;
  for (auto [sub, factor] : {std::pair{5, 0.6}, std::pair{1, -1.0}}) {
    FixedPointProblem q;
    q.h = alpha / sub;
    q.steps = 20;
    q.y0 = {1.0};
    q.forcing_dim = 1;
    q.rhs = [alpha](double, std::span<const double> u, std::span<const double> f, std::span<double> du) {
      du[0] = (2 / alpha) * (-f[0] - u[0]);
    };
    const StateSeries u = integrate_local(q, StateSeries(21, 1));
    for (std::size_t n = 0; n + 1 < u.size(); ++n) CHECK(u[n + 1][0] == doctest::Approx(factor * u[n][0]).epsilon(1e-14));
  }
}

TEST_CASE("zero forcing converges immediately") {
  FixedPointProblem p;
  p.h = 1e-2;
  p.steps = 100;
  p.y0 = {0.7};
  p.forcing_dim = 1;
  p.rhs = [](double, std::span<const double>, std::span<const double> f, std::span<double> dy) { dy[0] = -f[0]; };
  p.forcing = [](const StateSeries& y) { return ForcingSeries{StateSeries(y.size(), 1), 0}; };
  const auto r = picard_solve(p, {});
  CHECK(r.report.iterations == 1);
  CHECK(r.report.final_error == 0.0);
  CHECK(r.report.converged);
  for (std::size_t n = 0; n < r.states.size(); ++n) CHECK(r.states[n][0] == 0.7);
}

TEST_CASE("linear test IDE matches the dense oracle and the closed form") {
  const double h = 1e-3;
  const auto p = linear_ide(h, 1.0);
  const auto r = picard_solve(p, {});
  REQUIRE(r.report.converged);
  double worst_oracle = 0.0, worst_exact = 0.0;
  for (std::size_t n = 0; n < r.states.size(); n += 10) {
    const double t = h * static_cast<double>(n);
    worst_oracle = std::max(worst_oracle, std::abs(r.states[n][0] - dense_oracle(t, 1e-6)));
    worst_exact = std::max(worst_exact, std::abs(r.states[n][0] - (0.5 + 0.5 * std::exp(-2 * t))));
  }
  CHECK(worst_oracle <= 1e-3);
  CHECK(worst_exact <= 1e-3);
  // the oracle itself against the closed form
  CHECK(std::abs(dense_oracle(1.0, 1e-6) - (0.5 + 0.5 * std::exp(-2.0))) <= 1e-6);
}

TEST_CASE("report invariants and fixed-point residual") {
  const auto p = linear_ide(1e-2, 3.0);
  SolverConfig cfg;
  cfg.tol = 1e-10;
  const auto r = picard_solve(p, cfg);
  const auto& rep = r.report;
  CHECK(rep.converged);
  CHECK(rep.error_history.size() == static_cast<std::size_t>(rep.iterations));
  CHECK(rep.relax_history.size() == rep.error_history.size());
  CHECK(rep.converged == (rep.error_history.back() <= cfg.tol));
  CHECK(rep.final_error <= cfg.tol);
  for (std::size_t i = 1; i < rep.relax_history.size(); ++i) {
    CHECK(rep.relax_history[i] >= rep.relax_history[i - 1]);
    CHECK(rep.relax_history[i] <= cfg.relax_max);
  }
  // one more sweep barely moves the returned trajectory
  const auto f = p.forcing(r.states);
  const auto again = integrate_local(p, f.values);
  CHECK(squared_l2_difference(again, r.states) <= cfg.tol);
}

TEST_CASE("solves are deterministic") {
  const auto p = linear_ide(1e-2, 2.0);
  const auto a = picard_solve(p, {});
  const auto b = picard_solve(p, {});
  CHECK(a.states == b.states);
  CHECK(a.report.error_history == b.report.error_history);
}

TEST_CASE("iteration cap without convergence") {
  const auto p = linear_ide(1e-2, 2.0);
  SolverConfig cfg;
  cfg.tol = 1e-300;
  cfg.max_iter = 4;
  const auto r = picard_solve(p, cfg);
  CHECK_FALSE(r.report.converged);
  CHECK(r.report.iterations == 4);
  CHECK(r.report.error_history.size() == 4);
}

TEST_CASE("error growth at maximal relaxation exits with the best iterate") {
  // strongly anti-causal feedback: forcing at t is 50 * y(t_end); Picard diverges
  FixedPointProblem p;
  p.h = 1e-2;
  p.steps = 100;
  p.y0 = {1.0};
  p.forcing_dim = 1;
  p.rhs = [](double, std::span<const double>, std::span<const double> f, std::span<double> dy) { dy[0] = f[0]; };
  p.forcing = [](const StateSeries& y) {
    ForcingSeries out{StateSeries(y.size(), 1), 0};
    for (std::size_t n = 0; n < y.size(); ++n) out.values[n][0] = 50.0 * y[y.size() - 1][0];
    return out;
  };
  SolverConfig cfg;
  cfg.relax_init = 0.5;
  cfg.relax_max = 0.5;
  const auto r = picard_solve(p, cfg);
  CHECK(r.report.exited_at_relax_max);
  CHECK_FALSE(r.report.converged);
  double best = r.report.error_history.front();
  for (double e : r.report.error_history) best = std::min(best, e);
  CHECK(r.report.final_error == best);
  CHECK(r.report.iterations == static_cast<int>(r.report.error_history.size()));
}

TEST_CASE("non-finite iterates abort with the grid index") {
  FixedPointProblem p;
  p.h = 0.1;
  p.steps = 10;
  p.y0 = {1.0};
  p.forcing_dim = 1;
  p.rhs = [](double, std::span<const double>, std::span<const double> f, std::span<double> dy) { dy[0] = f[0]; };
  p.forcing = [](const StateSeries& y) {
    ForcingSeries out{StateSeries(y.size(), 1), 0};
    out.values[7][0] = std::numeric_limits<double>::quiet_NaN();
    return out;
  };
  try {
    picard_solve(p, {});
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.index() == 7);
    CHECK(std::string(e.what()).find("7") != std::string::npos);
  }
}

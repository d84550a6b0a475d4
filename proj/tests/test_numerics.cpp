#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nladam/numerics.hpp"

using namespace nladam;

TEST_CASE("Gauss-Legendre small rules") {
  const auto r1 = gauss_legendre(1, -1, 1);
  REQUIRE(r1.nodes.size() == 1);
  CHECK(std::abs(r1.nodes[0]) <= 1e-15);
  CHECK(r1.weights[0] == doctest::Approx(2.0).epsilon(1e-15));

  const auto r2 = gauss_legendre(2, -1, 1);
  CHECK(r2.nodes[0] == doctest::Approx(-1 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(r2.nodes[1] == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(r2.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r2.weights[1] == doctest::Approx(1.0).epsilon(1e-14));

  const auto r01 = gauss_legendre(2, 0, 1);
  CHECK(std::abs(r01.integrate([](double x) { return x * x * x; }) - 0.25) <= 1e-14);

  CHECK_THROWS_AS(gauss_legendre(3, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre(0, 0, 1), std::invalid_argument);
}

TEST_CASE("Gauss-Legendre weights sum to the interval length and nodes increase") {
  for (int n : {1, 2, 3, 7, 10, 64, 1000}) {
    const auto r = gauss_legendre(n, -0.3, 2.2);
    double sum = 0.0;
    for (double w : r.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(std::abs(sum - 2.5) <= 1e-12 * 2.5);
    for (std::size_t i = 1; i < r.nodes.size(); ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
    CHECK(r.nodes.front() > -0.3);
    CHECK(r.nodes.back() < 2.2);
  }
}

TEST_CASE("Gauss-Legendre integrates random polynomials of degree 2n-1 exactly") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int n = 1; n <= 10; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      const int deg = 2 * n - 1;
      std::vector<double> c(deg + 1);
      for (double& x : c) x = coef(rng);
      const double a = -0.7, b = 1.3;
      auto p = [&](double x) {
        double s = 0.0;
        for (int k = deg; k >= 0; --k) s = s * x + c[k];
        return s;
      };
      double exact = 0.0;
      for (int k = 0; k <= deg; ++k) exact += c[k] * (std::pow(b, k + 1) - std::pow(a, k + 1)) / (k + 1);
      const double got = gauss_legendre(n, a, b).integrate(p);
      double scale = 0.0;
      for (int k = 0; k <= deg; ++k) scale += std::abs(c[k]) * (std::pow(std::abs(b), k + 1) + std::pow(std::abs(a), k + 1)) / (k + 1);
      CHECK(std::abs(got - exact) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("composite rule on smooth integrands") {
  const auto unit = gauss_legendre(8, 0, 1);
  CHECK(integrate_composite([](double x) { return std::exp(-x); }, 0, 40, 20, unit) ==
        doctest::Approx(1 - std::exp(-40.0)).epsilon(1e-13));
}

namespace {
GridSeries sample(double t0, double h, int n, double (*f)(double)) {
  GridSeries g{t0, h, {}};
  for (int i = 0; i < n; ++i) g.values.push_back({f(t0 + h * i)});
  return g;
}
}  // namespace

TEST_CASE("cubic interpolation reproduces cubics and constants") {
  const auto cube = sample(0.0, 0.1, 11, [](double t) { return t * t * t; });
  CHECK(std::abs(cubic_interpolate(cube, 0.05).value[0] - 1.25e-4) <= 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double t = u(rng);
    CHECK(std::abs(cubic_interpolate(cube, t).value[0] - t * t * t) <= 1e-12);
  }
  const auto poly = sample(-2.0, 0.37, 4, [](double t) { return 2 - t + 0.5 * t * t - 0.3 * t * t * t; });
  for (double t : {-2.0, -1.9, -1.3, -0.9, -0.89}) {
    CHECK(std::abs(cubic_interpolate(poly, t).value[0] - (2 - t + 0.5 * t * t - 0.3 * t * t * t)) <= 1e-12);
  }
  const auto flat = sample(0.0, 0.5, 6, [](double) { return 4.2; });
  for (double t : {0.0, 0.3, 1.7, 2.5}) CHECK(cubic_interpolate(flat, t).value[0] == doctest::Approx(4.2).epsilon(1e-15));
}

TEST_CASE("cubic interpolation error on sin is fourth order") {
  const auto s = sample(0.0, 0.01, 301, [](double t) { return std::sin(t); });
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double t = 0.01 * (i + 0.5);
    worst = std::max(worst, std::abs(cubic_interpolate(s, t).value[0] - std::sin(t)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("cubic interpolation hits nodes and clamps outside") {
  const auto s = sample(1.0, 0.25, 9, [](double t) { return std::exp(t); });
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto r = cubic_interpolate(s, s.time(i));
    CHECK(r.value[0] == s.values[i][0]);
    CHECK_FALSE(r.clamped);
  }
  const auto lo = cubic_interpolate(s, 0.5);
  CHECK(lo.clamped);
  CHECK(lo.value[0] == s.values.front()[0]);
  const auto hi = cubic_interpolate(s, 10.0);
  CHECK(hi.clamped);
  CHECK(hi.value[0] == s.values.back()[0]);
}

TEST_CASE("short series fall back to lower order") {
  GridSeries two{0.0, 1.0, {{1.0}, {3.0}}};
  CHECK(cubic_interpolate(two, 0.25).value[0] == doctest::Approx(1.5));
  GridSeries three{0.0, 1.0, {{0.0}, {1.0}, {4.0}}};  // t^2
  CHECK(cubic_interpolate(three, 1.5).value[0] == doctest::Approx(2.25));
}

TEST_CASE("scalar and state interpolation agree with the vector form") {
  const auto g = sample(0.0, 0.1, 20, [](double t) { return std::cos(3 * t); });
  ScalarSeries sc{0.0, 0.1, {}};
  StateSeries st(20, 1);
  for (std::size_t i = 0; i < 20; ++i) {
    sc.values.push_back(g.values[i][0]);
    st[i][0] = g.values[i][0];
  }
  for (double t : {0.0, 0.123, 0.77, 1.9}) {
    double out[1];
    cubic_interpolate(st, 0.0, 0.1, t, out);
    CHECK(cubic_interpolate(sc, t) == cubic_interpolate(g, t).value[0]);
    CHECK(out[0] == cubic_interpolate(g, t).value[0]);
  }
}

TEST_CASE("log-log slope") {
  std::vector<std::pair<double, double>> sq, lin, noisy;
  for (double x : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}) {
    sq.push_back({x, x * x});
    lin.push_back({x, 3 * x});
  }
  for (int i = 0; i <= 40; ++i) {
    const double x = 1e-3 * std::pow(100.0, i / 40.0);
    noisy.push_back({x, x * x * (1 + 0.01 * std::sin(1 / x))});
  }
  CHECK(std::abs(loglog_slope(sq).slope - 2.0) <= 1e-12);
  const auto f = loglog_slope(lin);
  CHECK(std::abs(f.slope - 1.0) <= 1e-12);
  CHECK(std::abs(f.log_c - std::log(3.0)) <= 1e-11);
  CHECK(std::abs(loglog_slope(noisy).slope - 2.0) <= 0.05);

  std::vector<std::pair<double, double>> one{{1.0, 1.0}};
  CHECK_THROWS_AS(loglog_slope(one), std::invalid_argument);
  std::vector<std::pair<double, double>> neg{{1.0, 1.0}, {-2.0, 3.0}};
  CHECK_THROWS_AS(loglog_slope(neg), std::invalid_argument);
  std::vector<std::pair<double, double>> zero{{1.0, 1.0}, {2.0, 0.0}};
  CHECK_THROWS_AS(loglog_slope(zero), std::invalid_argument);
}

TEST_CASE("log-log slope drops points at the floating-point floor") {
  std::vector<std::pair<double, double>> pts{{1e-3, 1e-6}, {1e-2, 1e-4}, {1e-1, 1e-2}, {1e-4, 1e-16}};
  const auto f = loglog_slope(pts);
  CHECK(f.used_points == 3);
  CHECK(std::abs(f.slope - 2.0) <= 1e-12);
}

namespace {
std::vector<double> brute_envelope(const std::vector<double>& v, double h, double w) {
  // window (t_n - w, t_n], by direct comparison of times
  std::vector<double> env(v.size());
  for (std::size_t n = 0; n < v.size(); ++n) {
    double m = v[n];
    for (std::size_t j = 0; j < n; ++j) {
      if (h * static_cast<double>(n - j) < w - 1e-9 * h) m = std::max(m, v[j]);
    }
    env[n] = m;
  }
  return env;
}
}  // namespace

TEST_CASE("running envelope examples") {
  ScalarSeries s{0.0, 1.0, {3, 1, 2, 0.5}};
  CHECK(running_envelope(s, 2.0).values == std::vector<double>{3, 3, 2, 2});
  ScalarSeries dec{0.0, 0.1, {5, 4, 3, 2, 1}};
  CHECK(running_envelope(dec, 0.1).values == dec.values);
  CHECK(running_envelope(dec, 0.05).values == dec.values);
  ScalarSeries flat{0.0, 0.1, std::vector<double>(10, 2.5)};
  CHECK(running_envelope(flat, 0.35).values == flat.values);
}

TEST_CASE("running envelope matches brute force and is monotone in the window") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  ScalarSeries s{0.0, 0.01, {}};
  for (int i = 0; i < 500; ++i) s.values.push_back(nd(rng));
  std::vector<double> prev(s.size(), -1e300);
  for (double w : {0.005, 0.01, 0.03, 0.1, 0.1, 0.5, 2.0}) {
    const auto env = running_envelope(s, w);
    CHECK(env.values == brute_envelope(s.values, s.h, w));
    CHECK(env.values[0] == s.values[0]);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(env.values[i] >= s.values[i]);
      CHECK(env.values[i] >= prev[i]);
    }
    prev = env.values;
  }
}

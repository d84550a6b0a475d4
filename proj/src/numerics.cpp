#include "nladam/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

namespace nladam {

namespace {
constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxSteps = 100;
constexpr double kGridSnap = 1e-9;
constexpr double kLogLogFloor = 1e-15;

// Legendre P_n(x) and its derivative by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}
}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  if (!(a < b)) throw std::invalid_argument("gauss_legendre: need a < b");

  std::vector<double> x(n), w(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-like initial guess for the i-th largest root
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int step = 0; step < kNewtonMaxSteps; ++step) {
      auto [p, d] = legendre(n, z);
      dp = d;
      const double dz = p / d;
      z -= dz;
      if (std::abs(dz) <= kNewtonTol) break;
    }
    dp = legendre(n, z).second;
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = weight;
    w[n - 1 - i] = weight;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  QuadratureRule rule;
  rule.order = n;
  rule.a = a;
  rule.b = b;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half_width = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half_width * x[i];
    rule.weights[i] = half_width * w[i];
  }
  return rule;
}

void GridSeries::validate() const {
  if (!(h > 0.0)) throw std::invalid_argument("grid series: h must be positive");
  if (values.size() < 2) throw std::invalid_argument("grid series: need at least two samples");
  const std::size_t dim = values.front().size();
  for (const auto& v : values) {
    if (v.size() != dim) throw std::invalid_argument("grid series: inconsistent dimensions");
  }
}

InterpStencil cubic_stencil(double t0, double h, std::size_t n, double t) {
  InterpStencil st;
  if (n == 0) throw std::invalid_argument("interpolation on an empty series");
  if (n == 1) return st;

  const double last = static_cast<double>(n - 1);
  double x = (t - t0) / h;
  if (x < 0.0) {
    st.clamped = x < -kGridSnap;
    x = 0.0;
  } else if (x > last) {
    st.clamped = x > last + kGridSnap;
    x = last;
  }
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= kGridSnap) {
    st.first = static_cast<std::size_t>(nearest);
    return st;
  }

  const int order = static_cast<int>(std::min<std::size_t>(n, 4));
  const auto cell = static_cast<std::ptrdiff_t>(std::floor(x));
  std::ptrdiff_t first = cell - (order == 4 ? 1 : 0);
  first = std::clamp<std::ptrdiff_t>(first, 0, static_cast<std::ptrdiff_t>(n) - order);
  const double s = x - static_cast<double>(first);

  st.first = static_cast<std::size_t>(first);
  st.count = order;
  switch (order) {
    case 2:
      st.weights = {1.0 - s, s, 0.0, 0.0};
      break;
    case 3:
      st.weights = {(s - 1.0) * (s - 2.0) / 2.0, -s * (s - 2.0), s * (s - 1.0) / 2.0, 0.0};
      break;
    default:
      st.weights = {-(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0, s * (s - 2.0) * (s - 3.0) / 2.0,
                    -s * (s - 1.0) * (s - 3.0) / 2.0, s * (s - 1.0) * (s - 2.0) / 6.0};
      break;
  }
  return st;
}

InterpResult cubic_interpolate(const GridSeries& series, double t) {
  const auto st = cubic_stencil(series.t0, series.h, series.size(), t);
  InterpResult r;
  r.clamped = st.clamped;
  r.value.assign(series.values[st.first].size(), 0.0);
  for (int j = 0; j < st.count; ++j) {
    const auto& v = series.values[st.first + j];
    for (std::size_t d = 0; d < v.size(); ++d) r.value[d] += st.weights[j] * v[d];
  }
  return r;
}

double cubic_interpolate(const ScalarSeries& series, double t, bool* clamped) {
  const auto st = cubic_stencil(series.t0, series.h, series.size(), t);
  if (clamped) *clamped = st.clamped;
  double s = 0.0;
  for (int j = 0; j < st.count; ++j) s += st.weights[j] * series.values[st.first + j];
  return s;
}

void cubic_interpolate(const StateSeries& states, double t0, double h, double t,
                       std::span<double> out, bool* clamped) {
  const auto st = cubic_stencil(t0, h, states.size(), t);
  if (clamped) *clamped = st.clamped;
  std::fill(out.begin(), out.end(), 0.0);
  for (int j = 0; j < st.count; ++j) {
    const auto row = states[st.first + j];
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += st.weights[j] * row[d];
  }
}

LogLogFit loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("loglog_slope: need at least two points");
  std::vector<std::pair<double, double>> logs;
  for (auto [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw std::invalid_argument("loglog_slope: coordinates must be strictly positive");
    }
    if (y < kLogLogFloor) continue;
    logs.emplace_back(std::log(x), std::log(y));
  }
  if (logs.size() < 2) throw std::invalid_argument("loglog_slope: fewer than two usable points");

  const double n = static_cast<double>(logs.size());
  double mx = 0.0, my = 0.0;
  for (auto [lx, ly] : logs) {
    mx += lx;
    my += ly;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (auto [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: all x values coincide");

  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.log_c = my - fit.slope * mx;
  double rss = 0.0;
  for (auto [lx, ly] : logs) {
    const double r = ly - (fit.log_c + fit.slope * lx);
    rss += r * r;
  }
  fit.residual_norm = std::sqrt(rss);
  fit.used_points = logs.size();
  return fit;
}

std::size_t window_reach(double w, double h) {
  // points strictly inside (t - w, t]
  const double steps = std::ceil(w / h - kGridSnap);
  return steps <= 1.0 ? 0 : static_cast<std::size_t>(steps) - 1;
}

ScalarSeries running_envelope(const ScalarSeries& series, double w) {
  if (!(w > 0.0)) throw std::invalid_argument("running_envelope: window must be positive");
  const std::size_t reach = window_reach(w, series.h);
  ScalarSeries env{series.t0, series.h, std::vector<double>(series.size())};
  std::deque<std::size_t> candidates;  // indices with decreasing values
  for (std::size_t i = 0; i < series.size(); ++i) {
    while (!candidates.empty() && series.values[candidates.back()] <= series.values[i]) {
      candidates.pop_back();
    }
    candidates.push_back(i);
    while (candidates.front() + reach < i) candidates.pop_front();
    env.values[i] = series.values[candidates.front()];
  }
  return env;
}

}  // namespace nladam

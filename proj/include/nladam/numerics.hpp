#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "nladam/linalg.hpp"

namespace nladam {

/// n-point Gauss-Legendre rule on [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;
  double a = -1.0;
  double b = 1.0;

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

QuadratureRule gauss_legendre(int n, double a, double b);

/// Composite Gauss-Legendre over [a, b] split into equal panels.
template <class F>
double integrate_composite(F&& f, double a, double b, int panels, const QuadratureRule& unit) {
  // unit is a rule on [0, 1]
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double left = a + p * width;
    double s = 0.0;
    for (std::size_t i = 0; i < unit.nodes.size(); ++i) {
      s += unit.weights[i] * f(left + width * unit.nodes[i]);
    }
    total += s * width;
  }
  return total;
}

/// Vector-valued samples on the uniform grid t0, t0 + h, ...
struct GridSeries {
  double t0 = 0.0;
  double h = 1.0;
  std::vector<Vec> values;

  std::size_t size() const { return values.size(); }
  double time(std::size_t i) const { return t0 + h * static_cast<double>(i); }
  double t_end() const { return time(values.empty() ? 0 : values.size() - 1); }
  void validate() const;
};

/// Scalar samples on a uniform grid.
struct ScalarSeries {
  double t0 = 0.0;
  double h = 1.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double time(std::size_t i) const { return t0 + h * static_cast<double>(i); }
  double t_end() const { return time(values.empty() ? 0 : values.size() - 1); }
};

/// Local Lagrange stencil (up to four nodes) for evaluating a uniform-grid
/// interpolant at one time. Off-grid queries clamp to the nearest endpoint.
struct InterpStencil {
  std::size_t first = 0;
  int count = 1;
  std::array<double, 4> weights{1.0, 0.0, 0.0, 0.0};
  bool clamped = false;
};

InterpStencil cubic_stencil(double t0, double h, std::size_t n, double t);

struct InterpResult {
  Vec value;
  bool clamped = false;
};

InterpResult cubic_interpolate(const GridSeries& series, double t);
double cubic_interpolate(const ScalarSeries& series, double t, bool* clamped = nullptr);

/// Interpolates row-major states (any dimension) sampled on a uniform grid.
void cubic_interpolate(const StateSeries& states, double t0, double h, double t,
                       std::span<double> out, bool* clamped = nullptr);

struct LogLogFit {
  double slope = 0.0;
  double log_c = 0.0;
  double residual_norm = 0.0;
  std::size_t used_points = 0;
};

/// Least squares of log y on log x; points with y below 1e-15 are discarded.
LogLogFit loglog_slope(std::span<const std::pair<double, double>> points);

/// Backward running maximum over the trailing window of length w.
ScalarSeries running_envelope(const ScalarSeries& series, double w);

/// Number of earlier grid points a window of length w reaches back.
std::size_t window_reach(double w, double h);

}  // namespace nladam

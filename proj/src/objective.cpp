#include "nladam/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace nladam {

namespace {
constexpr double kCurvatureTol = 1e-10;

CriticalKind classify(double curvature) {
  if (std::abs(curvature) <= kCurvatureTol) return CriticalKind::Degenerate;
  return curvature > 0.0 ? CriticalKind::Minimum : CriticalKind::Maximum;
}
}  // namespace

Objective::Objective(std::size_t dimension, ValueFn value, GradientFn gradient, std::string name)
    : dimension_(dimension), value_(std::move(value)), gradient_(std::move(gradient)),
      name_(std::move(name)) {
  if (dimension_ == 0) throw std::invalid_argument("objective dimension must be positive");
  if (!value_ || !gradient_) throw std::invalid_argument("objective needs value and gradient");
}

Vec Objective::gradient(std::span<const double> theta) const {
  Vec g(dimension_);
  gradient_(theta, g);
  return g;
}

void RosenbrockParams::validate() const {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("rosenbrock: c must be finite and nonnegative");
  }
}

double rosenbrock_eval(double theta, double c) {
  const double a = 1.0 - theta;
  const double b = theta * theta - 1.0;
  return a * a + c * b * b;
}

double rosenbrock_grad(double theta, double c) {
  return 2.0 * (theta - 1.0) + 4.0 * c * theta * (theta * theta - 1.0);
}

double rosenbrock_curvature(double theta, double c) {
  return 2.0 + 4.0 * c * (3.0 * theta * theta - 1.0);
}

std::vector<CriticalPoint> rosenbrock_critical_points(double c) {
  RosenbrockParams{c}.validate();
  // f'(theta) = 2 (theta - 1) (2 c theta^2 + 2 c theta + 1)
  std::vector<CriticalPoint> out;
  out.push_back({1.0, classify(rosenbrock_curvature(1.0, c))});
  if (c == 2.0) {
    out.push_back({-0.5, CriticalKind::Degenerate});
  } else if (c > 2.0) {
    const double r = std::sqrt(1.0 - 2.0 / c);
    for (double root : {(-1.0 - r) / 2.0, (-1.0 + r) / 2.0}) {
      out.push_back({root, classify(rosenbrock_curvature(root, c))});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.theta < b.theta; });
  return out;
}

Objective make_rosenbrock(RosenbrockParams params) {
  params.validate();
  const double c = params.c;
  return Objective(
      1, [c](std::span<const double> x) { return rosenbrock_eval(x[0], c); },
      [c](std::span<const double> x, std::span<double> g) { g[0] = rosenbrock_grad(x[0], c); },
      "rosenbrock1d");
}

const char* to_string(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::Minimum: return "min";
    case CriticalKind::Maximum: return "max";
    case CriticalKind::Degenerate: return "degenerate";
  }
  return "unknown";
}

}  // namespace nladam

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nladam/linalg.hpp"

namespace nladam {

/// A differentiable scalar field f: R^n -> R together with its gradient.
class Objective {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

  Objective(std::size_t dimension, ValueFn value, GradientFn gradient, std::string name = "custom");

  std::size_t dimension() const { return dimension_; }
  const std::string& name() const { return name_; }

  double value(std::span<const double> theta) const { return value_(theta); }
  void gradient(std::span<const double> theta, std::span<double> out) const { gradient_(theta, out); }
  Vec gradient(std::span<const double> theta) const;

 private:
  std::size_t dimension_;
  ValueFn value_;
  GradientFn gradient_;
  std::string name_;
};

/// Nonconvexity strength of the Rosenbrock-type family; c >= 0.
struct RosenbrockParams {
  double c = 0.0;

  void validate() const;
};

// f(theta) = (1 - theta)^2 + c (theta^2 - 1)^2
double rosenbrock_eval(double theta, double c);
double rosenbrock_grad(double theta, double c);
double rosenbrock_curvature(double theta, double c);

enum class CriticalKind { Minimum, Maximum, Degenerate };

struct CriticalPoint {
  double theta = 0.0;
  CriticalKind kind = CriticalKind::Minimum;
};

/// All real roots of f', sorted ascending and classified by the sign of f''.
/// c < 2 gives {1}; c == 2 adds the degenerate double root -1/2; c > 2 adds
/// the local maximum and the secondary local minimum on the negative side.
std::vector<CriticalPoint> rosenbrock_critical_points(double c);

/// The 1-D Rosenbrock-type objective as an Objective instance.
Objective make_rosenbrock(RosenbrockParams params);

const char* to_string(CriticalKind kind);

}  // namespace nladam

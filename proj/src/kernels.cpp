#include "nladam/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nladam {

namespace {
// Below this |2 beta - 1| the kernel shape is evaluated from its Taylor series.
constexpr double kSeriesDiscriminant = 1e-8;
constexpr double kTruncationFoldings = 40.0;

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0, 1)");
}
}  // namespace

KernelRegime classify_regime(double beta) {
  check_beta(beta);
  if (std::abs(beta - 0.5) <= kCriticalBetaTol) return {Regime::Critical, 0.0, 0.0};
  if (beta > 0.5) return {Regime::Overdamped, std::sqrt(2.0 * beta - 1.0), 0.0};
  return {Regime::Underdamped, 0.0, std::sqrt(1.0 - 2.0 * beta)};
}

KernelSpec KernelSpec::make(double beta, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive");
  return KernelSpec{beta, alpha, classify_regime(beta)};
}

double KernelSpec::discriminant() const {
  switch (regime.kind) {
    case Regime::Critical: return 0.0;
    case Regime::Overdamped: return regime.kappa * regime.kappa;
    case Regime::Underdamped: return -regime.rho * regime.rho;
  }
  return 0.0;
}

double KernelSpec::decay_time() const {
  if (regime.kind != Regime::Overdamped) return alpha;
  // 1 - kappa without cancellation: (1 - kappa^2) / (1 + kappa)
  const double slow_rate = (2.0 * (1.0 - beta)) / (1.0 + regime.kappa);
  return alpha / slow_rate;
}

double KernelSpec::truncation_length() const {
  // The critical kernel carries an extra factor s/alpha; give it some room.
  const double extra = regime.kind == Regime::Critical ? 10.0 : 0.0;
  return (kTruncationFoldings + extra) * decay_time();
}

double hyperbolic_cos(double q, double x) {
  if (q > 0.0) return std::cosh(std::sqrt(q) * x);
  if (q < 0.0) return std::cos(std::sqrt(-q) * x);
  return 1.0;
}

double hyperbolic_sinc(double q, double x) {
  if (std::abs(q) < kSeriesDiscriminant && std::abs(q) * x * x < 1e-2) {
    const double z = q * x * x;
    return x * (1.0 + z / 6.0 + z * z / 120.0);
  }
  if (q > 0.0) {
    const double k = std::sqrt(q);
    return std::sinh(k * x) / k;
  }
  if (q < 0.0) {
    const double r = std::sqrt(-q);
    return std::sin(r * x) / r;
  }
  return x;
}

double kernel_eval(const KernelSpec& spec, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("kernel_eval: s must be nonnegative");
  const double x = s / spec.alpha;
  const double q = spec.discriminant();
  switch (spec.regime.kind) {
    case Regime::Critical:
      return 2.0 * x * std::exp(-x);
    case Regime::Overdamped: {
      if (q < kSeriesDiscriminant && q * x * x < 1e-2) {
        return 2.0 * std::exp(-x) * hyperbolic_sinc(q, x);
      }
      // (2/kappa) e^{-x} sinh(kappa x) written to stay finite for large x
      const double k = spec.regime.kappa;
      return std::exp(-(1.0 - k) * x) * (-std::expm1(-2.0 * k * x)) / k;
    }
    case Regime::Underdamped:
      return 2.0 * std::exp(-x) * hyperbolic_sinc(q, x);
  }
  return 0.0;
}

double normalized_kernel_eval(const KernelSpec& spec, double s) {
  return spec.lambda() * kernel_eval(spec, s);
}

double normalized_kernel_moment(const KernelSpec& spec, int k) {
  const double mean = 1.0 / spec.lambda();
  switch (k) {
    case 0: return 1.0;
    case 1: return mean;
    case 2: return (1.0 + spec.beta) * mean * mean;
    default: throw std::invalid_argument("normalized_kernel_moment: k must be 0, 1 or 2");
  }
}

double first_order_kernel_eval(double lambda, double tau) {
  return lambda * std::exp(-lambda * tau);
}

double first_order_truncation_length(double lambda) { return kTruncationFoldings / lambda; }

double positivity_margin(double beta) {
  check_beta(beta);
  if (beta >= 0.5) return 0.0;
  const double rho = std::sqrt(1.0 - 2.0 * beta);
  return std::exp(-std::numbers::pi / rho);
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::Critical: return "critical";
    case Regime::Overdamped: return "overdamped";
    case Regime::Underdamped: return "underdamped";
  }
  return "unknown";
}

}  // namespace nladam

#pragma once

namespace nladam {

enum class Regime { Critical, Overdamped, Underdamped };

/// Damping regime of the second-order memory kernel for a decay factor beta.
struct KernelRegime {
  Regime kind = Regime::Critical;
  double kappa = 0.0;  // sqrt(2 beta - 1), overdamped only
  double rho = 0.0;    // sqrt(1 - 2 beta), underdamped only
};

/// beta within this distance of 1/2 is classified as critical.
inline constexpr double kCriticalBetaTol = 1e-14;

KernelRegime classify_regime(double beta);

/// Decay factor and time scale of a second-order memory kernel K_beta.
struct KernelSpec {
  double beta = 0.0;
  double alpha = 1.0;
  KernelRegime regime;

  static KernelSpec make(double beta, double alpha);

  /// 2 beta - 1: signed squared frequency of the kernel's hyperbolic part.
  double discriminant() const;
  /// (1 - beta) / alpha, the weight turning K into a unit-mass kernel.
  double lambda() const { return (1.0 - beta) / alpha; }
  /// e-folding time of the slowest kernel mode.
  double decay_time() const;
  /// Integration horizon beyond which the kernel mass is below e^-40.
  double truncation_length() const;
};

/// Closed-form K_beta(s) for s >= 0.
double kernel_eval(const KernelSpec& spec, double s);

/// H(s) = ((1 - beta)/alpha) K_beta(s).
double normalized_kernel_eval(const KernelSpec& spec, double s);

/// Full moment int_0^inf s^k H(s) ds for k in {0, 1, 2}.
double normalized_kernel_moment(const KernelSpec& spec, int k);

/// lambda exp(-lambda tau): the first-order exponential kernel.
double first_order_kernel_eval(double lambda, double tau);

/// Truncation horizon for the first-order kernel with rate lambda.
double first_order_truncation_length(double lambda);

/// exp(-pi / rho_beta) for beta < 1/2, else 0.
double positivity_margin(double beta);

// Entire functions of the discriminant q used by the kernel and its
// recursive convolution: cosh(sqrt(q) x) and sinh(sqrt(q) x)/sqrt(q), with
// the trigonometric continuation for q < 0 and the limits 1 and x at q = 0.
double hyperbolic_cos(double q, double x);
double hyperbolic_sinc(double q, double x);

const char* to_string(Regime regime);

}  // namespace nladam

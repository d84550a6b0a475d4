#include "nladam/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nladam/numerics.hpp"

namespace nladam {

namespace {

constexpr int kMinNodesPerPanel = 6;
constexpr int kMaxNodesPerPanel = 64;

// Normalized kernel H(tau) of either order for decay factor beta.
struct MemoryKernel {
  KernelOrder order;
  double lambda;
  KernelSpec spec;

  MemoryKernel(KernelOrder o, double beta, double alpha)
      : order(o), lambda((1.0 - beta) / alpha), spec(KernelSpec::make(beta, alpha)) {}

  double operator()(double tau) const {
    return order == KernelOrder::First ? first_order_kernel_eval(lambda, tau)
                                       : normalized_kernel_eval(spec, tau);
  }

  double truncation() const {
    return order == KernelOrder::First ? first_order_truncation_length(lambda)
                                       : spec.truncation_length();
  }
};

// Integrates H(tau) * r(theta(t - tau)) over tau in [0, min(t - t0, L)],
// accumulating into out (size = dimension of r). Panels break where t - tau
// crosses a grid node so each panel sees one smooth piece of the interpolant.
template <class Source>
bool convolve_direct(const Trajectory& traj, const MemoryKernel& kernel, double t, int quad_nodes,
                     std::size_t out_dim, Source&& source, std::span<double> out) {
  if (quad_nodes < 1) throw std::invalid_argument("quad_nodes must be positive");
  std::fill(out.begin(), out.end(), 0.0);
  if (t < traj.t0) throw std::invalid_argument("moment evaluation before the trajectory start");
  const double upper = std::min(t - traj.t0, kernel.truncation());
  if (upper <= 0.0) return false;

  bool clamped = t > traj.t_end() + 1e-9 * traj.h;
  const StateSeries theta = traj.theta_states();

  // breakpoints in tau: 0, then t - t_j for grid nodes t_j in (t - upper, t)
  std::vector<double> breaks{0.0};
  const double x_hi = (t - traj.t0) / traj.h;
  const double x_lo = (t - upper - traj.t0) / traj.h;
  auto j = static_cast<std::ptrdiff_t>(std::floor(x_hi));
  if (static_cast<double>(j) >= x_hi - 1e-12) --j;
  for (; static_cast<double>(j) > x_lo + 1e-12; --j) {
    breaks.push_back(t - traj.time(static_cast<std::size_t>(std::max<std::ptrdiff_t>(j, 0))));
    if (j == 0) break;
  }
  breaks.push_back(upper);

  const auto panels = static_cast<int>(breaks.size() - 1);
  const int per_panel = std::clamp((quad_nodes + panels - 1) / panels, kMinNodesPerPanel,
                                   kMaxNodesPerPanel);
  const QuadratureRule unit = gauss_legendre(per_panel, 0.0, 1.0);

  Vec th(traj.dim());
  Vec r(out_dim);
  for (int p = 0; p < panels; ++p) {
    const double a = breaks[p];
    const double width = breaks[p + 1] - a;
    if (width <= 0.0) continue;
    for (std::size_t i = 0; i < unit.nodes.size(); ++i) {
      const double tau = a + width * unit.nodes[i];
      bool c = false;
      cubic_interpolate(theta, traj.t0, traj.h, t - tau, th, &c);
      clamped = clamped || c;
      source(th, r);
      const double w = unit.weights[i] * width * kernel(tau);
      for (std::size_t d = 0; d < out_dim; ++d) out[d] += w * r[d];
    }
  }
  return clamped;
}

}  // namespace

const char* to_string(KernelOrder order) { return order == KernelOrder::First ? "first" : "second"; }

VectorMoment moment_m(const Trajectory& traj, const AdamHyperParams& hp, const Objective& objective,
                      double t, KernelOrder order, int quad_nodes) {
  if (t < 0.0) throw std::invalid_argument("moment_m: t must be nonnegative");
  hp.validate();
  const MemoryKernel kernel(order, hp.beta1, hp.alpha);
  VectorMoment out;
  out.value.assign(objective.dimension(), 0.0);
  out.clamped = convolve_direct(
      traj, kernel, t, quad_nodes, objective.dimension(),
      [&](std::span<const double> th, std::span<double> r) { objective.gradient(th, r); },
      out.value);
  return out;
}

ScalarMoment moment_v(const Trajectory& traj, const AdamHyperParams& hp, const Objective& objective,
                      double t, KernelOrder order, int quad_nodes) {
  if (t < 0.0) throw std::invalid_argument("moment_v: t must be nonnegative");
  hp.validate();
  const MemoryKernel kernel(order, hp.beta2, hp.alpha);
  Vec g(objective.dimension());
  double raw = 0.0;
  ScalarMoment out;
  out.clamped = convolve_direct(
      traj, kernel, t, quad_nodes, 1,
      [&](std::span<const double> th, std::span<double> r) {
        objective.gradient(th, g);
        r[0] = norm_sq(g);
      },
      std::span<double>(&raw, 1));
  out.raw = raw;
  out.value = std::max(0.0, raw);
  return out;
}

double bias_eta(double t, const AdamHyperParams& hp) {
  if (!(t > 0.0)) throw std::invalid_argument("bias_eta: t must be positive");
  const double x = t / hp.alpha;
  // 1 - beta^x via expm1 keeps precision when beta^x is close to 1
  const double one_minus_b2 = hp.beta2 == 0.0 ? 1.0 : -std::expm1(x * std::log(hp.beta2));
  const double one_minus_b1 = hp.beta1 == 0.0 ? 1.0 : -std::expm1(x * std::log(hp.beta1));
  return std::sqrt(one_minus_b2) / one_minus_b1;
}

double bias_eps(double t, const AdamHyperParams& hp) {
  if (!(t > 0.0)) throw std::invalid_argument("bias_eps: t must be positive");
  const double x = t / hp.alpha;
  const double one_minus_b2 = hp.beta2 == 0.0 ? 1.0 : -std::expm1(x * std::log(hp.beta2));
  return hp.epsilon * std::sqrt(one_minus_b2);
}

Vec normalized_force(const Trajectory& traj, const AdamHyperParams& hp, const Objective& objective,
                     double t, KernelOrder order, int quad_nodes) {
  if (!(t > 0.0)) throw std::invalid_argument("normalized_force: t must be positive");
  const auto m = moment_m(traj, hp, objective, t, order, quad_nodes);
  const auto v = moment_v(traj, hp, objective, t, order, quad_nodes);
  const double denom = std::sqrt(v.value) + bias_eps(t, hp);
  Vec out = m.value;
  for (double& x : out) x /= denom;
  return out;
}

namespace {

// Cell-to-cell propagation of the causal convolution with a normalized kernel.
// For the second-order kernel H = 2 lambda e^{-x} S(q, x), x = tau/alpha, the
// pair A = int e^{-x} C(q,x) r, B = int e^{-x} S(q,x) r obeys the addition
// theorems of cosh/sinh, giving an exact linear update over one cell.
class KernelRecursion {
 public:
  KernelRecursion(KernelOrder order, double beta, double alpha, double h,
                  const QuadratureRule& cell_rule)
      : order_(order), lambda_((1.0 - beta) / alpha) {
    const std::size_t p = cell_rule.nodes.size();
    local_a_.resize(p);
    local_b_.resize(p);
    if (order_ == KernelOrder::First) {
      decay_ = std::exp(-lambda_ * h);
      for (std::size_t j = 0; j < p; ++j) {
        local_b_[j] = cell_rule.weights[j] * first_order_kernel_eval(lambda_, cell_rule.nodes[j]);
      }
      return;
    }
    const KernelSpec spec = KernelSpec::make(beta, alpha);
    q_ = spec.discriminant();
    const double y = h / alpha;
    decay_ = std::exp(-y);
    cy_ = hyperbolic_cos(q_, y);
    sy_ = hyperbolic_sinc(q_, y);
    for (std::size_t j = 0; j < p; ++j) {
      const double x = cell_rule.nodes[j] / alpha;
      const double e = cell_rule.weights[j] * std::exp(-x);
      local_a_[j] = e * hyperbolic_cos(q_, x);
      local_b_[j] = e * hyperbolic_sinc(q_, x);
    }
  }

  // Advances the accumulators (a, b) by one cell given source samples at the
  // cell's quadrature nodes (row j = node j, measured backward from the new node).
  void advance(std::span<double> a, std::span<double> b, const std::vector<double>& samples,
               std::size_t dim) const {
    const std::size_t p = local_b_.size();
    if (order_ == KernelOrder::First) {
      for (std::size_t d = 0; d < dim; ++d) {
        double acc = decay_ * b[d];
        for (std::size_t j = 0; j < p; ++j) acc += local_b_[j] * samples[j * dim + d];
        b[d] = acc;
      }
      return;
    }
    for (std::size_t d = 0; d < dim; ++d) {
      double na = decay_ * (cy_ * a[d] + q_ * sy_ * b[d]);
      double nb = decay_ * (sy_ * a[d] + cy_ * b[d]);
      for (std::size_t j = 0; j < p; ++j) {
        na += local_a_[j] * samples[j * dim + d];
        nb += local_b_[j] * samples[j * dim + d];
      }
      a[d] = na;
      b[d] = nb;
    }
  }

  // Moment value from the accumulators.
  double value(double a, double b) const {
    (void)a;
    return order_ == KernelOrder::First ? b : 2.0 * lambda_ * b;
  }

 private:
  KernelOrder order_;
  double lambda_;
  double q_ = 0.0;
  double decay_ = 1.0;
  double cy_ = 1.0;
  double sy_ = 0.0;
  std::vector<double> local_a_;
  std::vector<double> local_b_;
};

}  // namespace

MomentSeries moment_series(const StateSeries& theta, double t0, double h, const AdamHyperParams& hp,
                           const Objective& objective, KernelOrder order, int nodes_per_cell) {
  hp.validate();
  if (!(h > 0.0)) throw std::invalid_argument("moment_series: h must be positive");
  if (nodes_per_cell < 1) throw std::invalid_argument("moment_series: nodes_per_cell must be positive");
  const std::size_t n = theta.size();
  const std::size_t d = theta.dim();
  if (d != objective.dimension()) throw std::invalid_argument("moment_series: dimension mismatch");

  MomentSeries out;
  out.t0 = t0;
  out.h = h;
  out.order = order;
  out.m = StateSeries(n, d);
  out.v.assign(n, 0.0);
  out.v_raw.assign(n, 0.0);
  if (n < 2) return out;

  // backward offsets s_j in (0, h) from the right end of each cell
  const QuadratureRule cell_rule = gauss_legendre(nodes_per_cell, 0.0, h);
  const std::size_t p = cell_rule.nodes.size();
  const KernelRecursion rec_m(order, hp.beta1, hp.alpha, h, cell_rule);
  const KernelRecursion rec_v(order, hp.beta2, hp.alpha, h, cell_rule);

  // interpolation stencils: every cell shares the same relative positions,
  // so precompute one stencil per (cell type, node)
  auto stencil_for = [&](std::size_t cell, std::size_t j) {
    const double t = t0 + h * static_cast<double>(cell + 1) - cell_rule.nodes[j];
    return cubic_stencil(t0, h, n, t);
  };
  std::vector<InterpStencil> interior(p);
  const bool shared = n >= 5;
  if (shared) {
    for (std::size_t j = 0; j < p; ++j) interior[j] = stencil_for(1, j);
  }

  std::vector<double> grads(p * d);
  std::vector<double> sq(p);
  Vec th(d);
  Vec am(d, 0.0), bm(d, 0.0);
  double av = 0.0, bv = 0.0;

  for (std::size_t cell = 0; cell + 1 < n; ++cell) {
    const bool use_shared = shared && cell >= 1 && cell + 3 <= n - 1;
    for (std::size_t j = 0; j < p; ++j) {
      InterpStencil st;
      if (use_shared) {
        st = interior[j];
        st.first = interior[j].first + (cell - 1);
      } else {
        st = stencil_for(cell, j);
      }
      std::fill(th.begin(), th.end(), 0.0);
      for (int k = 0; k < st.count; ++k) {
        const auto row = theta[st.first + k];
        for (std::size_t c = 0; c < d; ++c) th[c] += st.weights[k] * row[c];
      }
      std::span<double> g(grads.data() + j * d, d);
      objective.gradient(th, g);
      sq[j] = norm_sq(g);
    }
    rec_m.advance(am, bm, grads, d);
    rec_v.advance(std::span<double>(&av, 1), std::span<double>(&bv, 1), sq, 1);

    auto row = out.m[cell + 1];
    for (std::size_t c = 0; c < d; ++c) row[c] = rec_m.value(am[c], bm[c]);
    const double raw = rec_v.value(av, bv);
    out.v_raw[cell + 1] = raw;
    out.v[cell + 1] = std::max(0.0, raw);
    if (raw < 0.0) ++out.clip_events;
  }
  return out;
}

MomentSeries moment_series(const Trajectory& traj, const AdamHyperParams& hp,
                           const Objective& objective, KernelOrder order, int nodes_per_cell) {
  return moment_series(traj.theta_states(), traj.t0, traj.h, hp, objective, order, nodes_per_cell);
}

double moment_comparison_constant(const AdamHyperParams& hp) {
  const double a = 1.0 - hp.beta1;
  return a * a / ((1.0 - hp.beta2) * (1.0 + hp.beta2 - 2.0 * hp.beta1));
}

}  // namespace nladam

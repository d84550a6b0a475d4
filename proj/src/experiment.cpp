#include "nladam/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <stdexcept>

#include "nladam/dynamics.hpp"
#include "nladam/kernels.hpp"
#include "nladam/numerics.hpp"

namespace nladam {

using nlohmann::json;

namespace {

struct Named {
  const char* name;
  int value;
};

constexpr Named kCommands[] = {
    {"simulate", static_cast<int>(Command::Simulate)},
    {"sweep-alpha", static_cast<int>(Command::SweepAlpha)},
    {"basin-scan", static_cast<int>(Command::BasinScan)},
    {"envelope-fit", static_cast<int>(Command::EnvelopeFit)},
    {"velocity-sweep", static_cast<int>(Command::VelocitySweep)},
    {"kernel-check", static_cast<int>(Command::KernelCheck)},
    {"compare", static_cast<int>(Command::Compare)},
};

constexpr Named kModels[] = {
    {"discrete", static_cast<int>(Model::Discrete)},
    {"first-order", static_cast<int>(Model::FirstOrder)},
    {"second-order", static_cast<int>(Model::SecondOrder)},
};

template <class E, std::size_t N>
const char* name_of(const Named (&table)[N], E value) {
  for (const auto& entry : table) {
    if (entry.value == static_cast<int>(value)) return entry.name;
  }
  return "?";
}

template <class E, std::size_t N>
std::optional<E> value_of(const Named (&table)[N], std::string_view name) {
  for (const auto& entry : table) {
    if (name == entry.name) return static_cast<E>(entry.value);
  }
  return std::nullopt;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return out;
}

}  // namespace

const char* to_string(Command command) { return name_of(kCommands, command); }
const char* to_string(Model model) { return name_of(kModels, model); }
std::optional<Command> parse_command(std::string_view name) { return value_of<Command>(kCommands, name); }
std::optional<Model> parse_model(std::string_view name) { return value_of<Model>(kModels, name); }

void ExperimentConfig::validate() const {
  if (command != Command::KernelCheck) hp.validate();
  solver.validate();
  if (t_end && !(*t_end > 0.0)) throw std::invalid_argument("config: t_end must be positive");
  if (!t_end && command != Command::BasinScan) throw std::invalid_argument("config: t_end is required");
  if (!(c >= 0.0)) throw std::invalid_argument("config: c must be nonnegative");
  if (!(window > 0.0)) throw std::invalid_argument("config: window must be positive");
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) throw std::invalid_argument("config: tail_fraction must lie in (0, 1)");
  if (!(delta >= 0.0)) throw std::invalid_argument("config: delta must be nonnegative");
  if (!(kernel_beta >= 0.0 && kernel_beta < 1.0)) throw std::invalid_argument("config: kernel beta must lie in [0, 1)");
  for (double a : alphas) {
    if (!(a > 0.0)) throw std::invalid_argument("config: sweep alphas must be positive");
  }
  if (command == Command::BasinScan && !(c > 2.0)) {
    throw std::invalid_argument("config: basin-scan needs a bistable landscape (c > 2)");
  }
  if ((command == Command::EnvelopeFit || command == Command::VelocitySweep) && t_end && !(delta < *t_end)) {
    throw std::invalid_argument("config: delta must lie before t_end");
  }
}

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig r = *this;
  switch (command) {
    case Command::SweepAlpha:
      if (r.alphas.empty()) r.alphas = {1e-2, 5e-3, 2e-3, 1e-3, 5e-4};
      if (r.u0s.empty()) r.u0s = {-1.0, 0.0, 1.0};
      break;
    case Command::BasinScan:
      if (r.alphas.empty()) r.alphas = log_spaced(1e-4, 1e-1, 8);
      break;
    case Command::VelocitySweep:
      if (r.alphas.empty()) r.alphas = {1e-2, 5e-3, 2e-3, 1e-3};
      if (r.u0s.empty()) r.u0s = {-1.0, 1.0, 2.0};
      break;
    default:
      break;
  }
  if (!r.t_end && command != Command::BasinScan) r.t_end = 2.0;
  std::sort(r.alphas.begin(), r.alphas.end());
  std::sort(r.u0s.begin(), r.u0s.end());
  return r;
}

json to_json(const ExperimentConfig& c) {
  json solver = {
      {"tol", c.solver.tol},
      {"max_iter", c.solver.max_iter},
      {"relax_init", c.solver.relax_init},
      {"relax_max", c.solver.relax_max},
      {"relax_increment", c.solver.relax_increment},
      {"quad_nodes", c.solver.quad_nodes},
      {"substeps", c.solver.substeps ? json(*c.solver.substeps) : json(nullptr)},
  };
  return json{
      {"command", to_string(c.command)},
      {"model", to_string(c.model)},
      {"c", c.c},
      {"alpha", c.hp.alpha},
      {"beta1", c.hp.beta1},
      {"beta2", c.hp.beta2},
      {"epsilon", c.hp.epsilon},
      {"adam_mode", to_string(c.adam_mode)},
      {"theta0", c.theta0},
      {"u0", c.u0},
      {"t_end", c.t_end ? json(*c.t_end) : json(nullptr)},
      {"solver", solver},
      {"output", c.output},
      {"alphas", c.alphas},
      {"u0s", c.u0s},
      {"u0_ref", c.u0_ref},
      {"delta", c.delta},
      {"window", c.window},
      {"tail_fraction", c.tail_fraction},
      {"kernel_beta", c.kernel_beta},
  };
}

ExperimentConfig config_from_json(const json& j, const ExperimentConfig& base) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  ExperimentConfig c = base;
  static const std::set<std::string> known = {
      "command", "model", "c", "alpha", "beta1", "beta2", "epsilon", "adam_mode", "theta0", "u0", "t_end",
      "solver", "output", "alphas", "u0s", "u0_ref", "delta", "window", "tail_fraction", "kernel_beta"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw std::invalid_argument("config: unknown key '" + item.key() + "'");
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  if (j.contains("command")) {
    const auto cmd = parse_command(j.at("command").get<std::string>());
    if (!cmd) throw std::invalid_argument("config: unknown command");
    c.command = *cmd;
  }
  if (j.contains("model")) {
    const auto model = parse_model(j.at("model").get<std::string>());
    if (!model) throw std::invalid_argument("config: unknown model");
    c.model = *model;
  }
  if (j.contains("adam_mode")) {
    const auto mode = j.at("adam_mode").get<std::string>();
    if (mode == to_string(AdamMode::Isotropic)) {
      c.adam_mode = AdamMode::Isotropic;
    } else if (mode == to_string(AdamMode::Coordinatewise)) {
      c.adam_mode = AdamMode::Coordinatewise;
    } else {
      throw std::invalid_argument("config: unknown adam_mode");
    }
  }
  get("c", c.c);
  get("alpha", c.hp.alpha);
  get("beta1", c.hp.beta1);
  get("beta2", c.hp.beta2);
  get("epsilon", c.hp.epsilon);
  get("theta0", c.theta0);
  get("u0", c.u0);
  if (j.contains("t_end")) {
    c.t_end = j.at("t_end").is_null() ? std::nullopt : std::optional<double>(j.at("t_end").get<double>());
  }
  get("output", c.output);
  get("alphas", c.alphas);
  get("u0s", c.u0s);
  get("u0_ref", c.u0_ref);
  get("delta", c.delta);
  get("window", c.window);
  get("tail_fraction", c.tail_fraction);
  get("kernel_beta", c.kernel_beta);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    if (!s.is_object()) throw std::invalid_argument("config: solver must be an object");
    static const std::set<std::string> solver_keys = {"tol",        "max_iter",        "relax_init", "relax_max",
                                                      "relax_increment", "quad_nodes", "substeps"};
    for (const auto& item : s.items()) {
      if (!solver_keys.count(item.key())) throw std::invalid_argument("config: unknown solver key '" + item.key() + "'");
    }
    if (s.contains("tol")) s.at("tol").get_to(c.solver.tol);
    if (s.contains("max_iter")) s.at("max_iter").get_to(c.solver.max_iter);
    if (s.contains("relax_init")) s.at("relax_init").get_to(c.solver.relax_init);
    if (s.contains("relax_max")) s.at("relax_max").get_to(c.solver.relax_max);
    if (s.contains("relax_increment")) s.at("relax_increment").get_to(c.solver.relax_increment);
    if (s.contains("quad_nodes")) s.at("quad_nodes").get_to(c.solver.quad_nodes);
    if (s.contains("substeps")) {
      c.solver.substeps = s.at("substeps").is_null() ? std::nullopt : std::optional<int>(s.at("substeps").get<int>());
    }
  }
  return c;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string column_names(const char* stem, std::size_t dim) {
  if (dim == 1) return std::string(",") + stem;
  std::string out;
  for (std::size_t d = 0; d < dim; ++d) out += "," + std::string(stem) + "_" + std::to_string(d);
  return out;
}

void append_values(std::string& line, const Vec& xs) {
  for (double x : xs) line += "," + format_double(x);
}

std::string optional_cell(const std::optional<double>& x) { return x ? format_double(*x) : "nan"; }

}  // namespace

std::string trajectory_csv(const Trajectory& traj) {
  const std::size_t dim = traj.dim();
  std::string out = "t" + column_names("theta", dim);
  if (traj.u) out += column_names("u", dim);
  out += column_names("m", dim) + ",v,f,grad_norm,eta,eps_t,is_matched_time\n";
  for (std::size_t n = 0; n < traj.size(); ++n) {
    std::string line = format_double(traj.time(n));
    append_values(line, traj.theta[n]);
    if (traj.u) append_values(line, (*traj.u)[n]);
    const NodeRecord& rec = traj.records.at(n);
    append_values(line, rec.m);
    for (double x : {rec.v, rec.f, rec.grad_norm, rec.eta, rec.eps_t}) line += "," + format_double(x);
    line += traj.is_matched_time(n) ? ",1\n" : ",0\n";
    out += line;
  }
  return out;
}

std::string sweep_csv(const std::vector<ErrorScalingRow>& rows) {
  std::string out = "alpha,model,u0,E_T,E_fT\n";
  for (const auto& r : rows) {
    out += format_double(r.alpha) + "," + (r.model == DynamicsKind::FirstOrder ? "first" : "second") + "," +
           format_double(r.u0) + "," + format_double(r.E_T) + "," + format_double(r.E_fT) + "\n";
  }
  return out;
}

std::string basin_csv(const std::vector<BasinRow>& rows) {
  std::string out = "alpha,final_theta_discrete,final_theta_second,basin_discrete,basin_second\n";
  for (const auto& r : rows) {
    out += format_double(r.alpha) + "," + format_double(r.final_discrete) + "," + format_double(r.final_second) +
           "," + optional_cell(r.basin_discrete) + "," + optional_cell(r.basin_second) + "\n";
  }
  return out;
}

std::string velocity_csv(const std::vector<VelocityRow>& rows) {
  std::string out = "alpha,u0,delta_theta,delta_phi\n";
  for (const auto& r : rows) {
    out += format_double(r.alpha) + "," + format_double(r.u0) + "," + format_double(r.delta_theta) + "," +
           format_double(r.delta_phi) + "\n";
  }
  return out;
}

KernelCheckReport kernel_check(double beta, double alpha) {
  const KernelSpec spec = KernelSpec::make(beta, alpha);
  KernelCheckReport r;
  r.beta = beta;
  r.alpha = alpha;
  const double L = spec.truncation_length();
  const QuadratureRule unit = gauss_legendre(16, 0.0, 1.0);
  const int panels = std::max(400, static_cast<int>(std::ceil(8.0 * L / alpha)));
  const double mean = alpha / (1.0 - beta);
  r.expected[0] = 1.0;
  r.expected[1] = mean;
  r.expected[2] = (1.0 + beta) * mean * mean;
  for (int k = 0; k < 3; ++k) {
    r.moments[k] = integrate_composite(
        [&](double s) { return std::pow(s, k) * normalized_kernel_eval(spec, s); }, 0.0, L, panels, unit);
    r.rel_error[k] = std::abs(r.moments[k] - r.expected[k]) / r.expected[k];
  }
  bool ok = r.rel_error[0] <= 1e-6 && r.rel_error[1] <= 1e-6 && r.rel_error[2] <= 1e-6;

  r.underdamped = spec.regime.kind == Regime::Underdamped;
  if (r.underdamped) {
    const double half = std::numbers::pi * alpha / spec.regime.rho;
    r.q = positivity_margin(beta);
    for (int i = 0; i <= 1000; ++i) {
      const double s = 10.0 * half * i / 1000;
      r.reflection_residual =
          std::max(r.reflection_residual, std::abs(kernel_eval(spec, s + half) + r.q * kernel_eval(spec, s)));
    }
    // sign changes sit at multiples of the half period
    for (double t : {0.5 * half, half, 2 * half, 5 * half, 10 * half}) {
      double plus = 0.0, minus = 0.0;
      for (int j = 0; j * half < t; ++j) {
        const double lo = j * half, hi = std::min((j + 1) * half, t);
        const double piece =
            integrate_composite([&](double s) { return kernel_eval(spec, s); }, lo, hi, 64, unit);
        (j % 2 == 0 ? plus : minus) += std::abs(piece);
      }
      r.worst_truncated_ratio = std::max(r.worst_truncated_ratio, minus / (r.q * plus));
    }
    // equality holds at even multiples of the half period, so allow rounding
    ok = ok && r.reflection_residual <= 1e-6 && r.worst_truncated_ratio <= 1.0 + 1e-10;
  }
  r.pass = ok;
  return r;
}

json to_json(const KernelCheckReport& r) {
  json moments = json::array();
  for (int k = 0; k < 3; ++k) {
    moments.push_back({{"k", k}, {"numeric", r.moments[k]}, {"expected", r.expected[k]}, {"rel_error", r.rel_error[k]}});
  }
  json out{{"beta", r.beta},
           {"alpha", r.alpha},
           {"regime", to_string(classify_regime(r.beta).kind)},
           {"moments", moments},
           {"pass", r.pass}};
  if (r.underdamped) {
    out["reflection"] = {{"q", r.q}, {"max_residual", r.reflection_residual}};
    out["truncated_ratio_max"] = r.worst_truncated_ratio;
  } else {
    out["reflection"] = nullptr;
  }
  return out;
}

namespace {

json report_json(const std::string& label, double alpha, const DynamicsResult& res) {
  const ConvergenceReport& rep = res.report;
  return json{{"label", label},
              {"alpha", alpha},
              {"converged", rep.converged},
              {"iterations", rep.iterations},
              {"final_error", rep.final_error},
              {"relax_final", rep.relax_final},
              {"clip_events_final", rep.clip_events_final},
              {"exited_at_relax_max", rep.exited_at_relax_max},
              {"stable_regime", res.stable_regime},
              {"positivity_enforced", res.positivity_enforced},
              {"warnings", res.warnings}};
}

json discrete_json(double alpha, const AdamRun& run) {
  return json{{"label", "discrete"},
              {"alpha", alpha},
              {"iterations", run.trajectory.size() - 1},
              {"stable_regime", run.stable_regime}};
}

struct ModelRun {
  Trajectory trajectory;
  json report;
  bool converged = true;
};

ModelRun run_model(const ExperimentConfig& cfg, Model model, double t_end) {
  const Objective obj = make_rosenbrock({cfg.c});
  ModelRun out;
  switch (model) {
    case Model::Discrete: {
      AdamRun run = adam_run({cfg.theta0}, iterations_for_horizon(t_end, cfg.hp.alpha), cfg.hp, obj, cfg.adam_mode);
      out.report = discrete_json(cfg.hp.alpha, run);
      out.trajectory = std::move(run.trajectory);
      break;
    }
    case Model::FirstOrder: {
      DynamicsResult res = run_first_order({cfg.theta0}, cfg.hp, obj, t_end, cfg.solver);
      out.report = report_json("first-order", cfg.hp.alpha, res);
      out.converged = res.report.converged;
      out.trajectory = std::move(res.trajectory);
      break;
    }
    case Model::SecondOrder: {
      DynamicsResult res = run_second_order({cfg.theta0}, {cfg.u0}, cfg.hp, obj, t_end, cfg.solver);
      out.report = report_json("second-order", cfg.hp.alpha, res);
      out.converged = res.report.converged;
      out.trajectory = std::move(res.trajectory);
      break;
    }
  }
  return out;
}

json fit_json(const FitResult& f) {
  return json{{"A", f.A},
              {"omega", f.omega},
              {"B", f.B},
              {"delta", f.delta},
              {"window", f.window},
              {"violations", f.violations},
              {"tail_start", f.tail_start},
              {"used_points", f.used_points},
              {"usable", f.usable}};
}

json slope_json(const std::vector<ErrorScalingRow>& rows, DynamicsKind model, double u0) {
  json out{{"model", model == DynamicsKind::FirstOrder ? "first" : "second"}};
  if (model == DynamicsKind::SecondOrder) out["u0"] = u0;
  try {
    const ScalingSlopes s = scaling_slopes(rows, model, u0);
    out["p"] = s.theta.slope;
    out["p_f"] = s.value.slope;
    out["ratio"] = s.ratio;
    out["residual_theta"] = s.theta.residual_norm;
    out["residual_value"] = s.value.residual_norm;
  } catch (const std::invalid_argument&) {
    out["p"] = nullptr;  // too few usable points
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& input) {
  const ExperimentConfig cfg = input.resolved();
  cfg.validate();
  ExperimentOutput out;
  json runs = json::array();
  json summary = json::object();
  const Objective obj = make_rosenbrock({cfg.c});

  switch (cfg.command) {
    case Command::Simulate: {
      ModelRun run = run_model(cfg, cfg.model, *cfg.t_end);
      runs.push_back(run.report);
      out.converged = run.converged;
      summary["rows"] = run.trajectory.size();
      summary["final_theta"] = run.trajectory.theta.back();
      out.artifacts.push_back({"trajectory.csv", trajectory_csv(run.trajectory)});
      break;
    }
    case Command::SweepAlpha: {
      const auto rows = error_scaling_sweep(cfg.alphas, cfg.hp, cfg.c, cfg.theta0, cfg.u0s, *cfg.t_end, cfg.solver);
      for (const auto& r : rows) out.converged = out.converged && r.converged;
      json slopes = json::array();
      slopes.push_back(slope_json(rows, DynamicsKind::FirstOrder, 0.0));
      for (double u0 : cfg.u0s) slopes.push_back(slope_json(rows, DynamicsKind::SecondOrder, u0));
      summary["slopes"] = slopes;
      summary["all_converged"] = out.converged;
      out.artifacts.push_back({"sweep.csv", sweep_csv(rows)});
      break;
    }
    case Command::BasinScan: {
      const auto rows = basin_scan(cfg.alphas, cfg.hp, cfg.c, cfg.theta0, cfg.u0, cfg.t_end, cfg.solver);
      json horizons = json::array();
      for (const auto& r : rows) {
        out.converged = out.converged && r.converged;
        horizons.push_back({{"alpha", r.alpha}, {"t_end", r.t_end}, {"converged", r.converged}});
      }
      summary["runs"] = horizons;
      out.artifacts.push_back({"basin.csv", basin_csv(rows)});
      break;
    }
    case Command::EnvelopeFit: {
      ModelRun run = run_model(cfg, cfg.model, *cfg.t_end);
      runs.push_back(run.report);
      out.converged = run.converged;
      const double f_star = nearest_critical_value(run.trajectory, cfg.c);
      const ScalarSeries phi = residual_series(run.trajectory, obj, f_star);
      const FitResult fit = fit_envelope_bound(phi, cfg.delta, cfg.window, cfg.tail_fraction);
      const ScalarSeries env = running_envelope(phi, cfg.window);
      std::string csv = "t,phi,env\n";
      for (std::size_t n = 0; n < phi.size(); ++n) {
        csv += format_double(phi.time(n)) + "," + format_double(phi.values[n]) + "," + format_double(env.values[n]) + "\n";
      }
      summary["f_star"] = f_star;
      out.artifacts.push_back({"fit.json", dump(fit_json(fit))});
      out.artifacts.push_back({"envelope.csv", csv});
      break;
    }
    case Command::VelocitySweep: {
      const auto rows = velocity_sensitivity(cfg.alphas, cfg.u0s, cfg.u0_ref, cfg.delta, cfg.hp, cfg.c, cfg.theta0,
                                             *cfg.t_end, cfg.solver);
      for (const auto& r : rows) out.converged = out.converged && r.converged;
      summary["all_converged"] = out.converged;
      out.artifacts.push_back({"velocity.csv", velocity_csv(rows)});
      break;
    }
    case Command::KernelCheck: {
      const KernelCheckReport report = kernel_check(cfg.kernel_beta, cfg.hp.alpha);
      summary["pass"] = report.pass;
      out.artifacts.push_back({"kernel_check.json", dump(to_json(report))});
      break;
    }
    case Command::Compare: {
      const ModelRun d = run_model(cfg, Model::Discrete, *cfg.t_end);
      const ModelRun f = run_model(cfg, Model::FirstOrder, *cfg.t_end);
      const ModelRun s = run_model(cfg, Model::SecondOrder, *cfg.t_end);
      runs = json::array({d.report, f.report, s.report});
      out.converged = f.converged && s.converged;
      std::string csv = "t" + column_names("theta_discrete", 1) + column_names("theta_first", 1) +
                        column_names("theta_second", 1) + "\n";
      double sup_first = 0.0, sup_second = 0.0;
      for (std::size_t k = 0; k < d.trajectory.size(); ++k) {
        const Vec& a = d.trajectory.theta[k];
        const Vec& b = f.trajectory.theta.at(k * f.trajectory.stride);
        const Vec& c = s.trajectory.theta.at(k * s.trajectory.stride);
        sup_first = std::max(sup_first, distance(a, b));
        sup_second = std::max(sup_second, distance(a, c));
        std::string line = format_double(d.trajectory.time(k));
        append_values(line, a);
        append_values(line, b);
        append_values(line, c);
        csv += line + "\n";
      }
      summary["sup_discrete_first"] = sup_first;
      summary["sup_discrete_second"] = sup_second;
      out.artifacts.push_back({"compare.csv", csv});
      break;
    }
  }

  json artifacts = json::array();
  for (const auto& a : out.artifacts) artifacts.push_back(a.name);
  artifacts.push_back("manifest.json");
  const json manifest{{"config", to_json(cfg)},
                      {"converged", out.converged},
                      {"runs", runs},
                      {"summary", summary},
                      {"artifacts", artifacts}};
  out.artifacts.push_back({"manifest.json", dump(manifest)});
  return out;
}

void write_artifacts(const ExperimentOutput& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& a : out.artifacts) {
    std::ofstream file(dir / a.name, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + (dir / a.name).string() + " for writing");
    file << a.content;
    if (!file) throw std::runtime_error("failed writing " + (dir / a.name).string());
  }
}

}  // namespace nladam

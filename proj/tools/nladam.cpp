#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nladam/experiment.hpp"

using nladam::ExperimentConfig;

namespace {

// Flags hold raw strings/numbers; only the ones given on the command line
// override the config file (or the defaults).
struct Overrides {
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> items;

  template <class T, class Apply>
  void add(CLI::App* app, const std::string& flag, const std::string& help, Apply apply) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    items.emplace_back(opt, [value, apply](ExperimentConfig& c) { apply(c, *value); });
  }

  void apply(ExperimentConfig& c) const {
    for (const auto& [opt, fn] : items) {
      if (opt->count() > 0) fn(c);
    }
  }
};

void add_flags(CLI::App* app, Overrides& o) {
  o.add<std::string>(app, "--model", "discrete | first-order | second-order", [](ExperimentConfig& c, const std::string& v) {
    const auto m = nladam::parse_model(v);
    if (!m) throw CLI::ValidationError("--model", "unknown model '" + v + "'");
    c.model = *m;
  });
  o.add<std::string>(app, "--adam-mode", "isotropic | coordinatewise", [](ExperimentConfig& c, const std::string& v) {
    if (v == "isotropic") {
      c.adam_mode = nladam::AdamMode::Isotropic;
    } else if (v == "coordinatewise") {
      c.adam_mode = nladam::AdamMode::Coordinatewise;
    } else {
      throw CLI::ValidationError("--adam-mode", "unknown mode '" + v + "'");
    }
  });
  o.add<double>(app, "--c", "nonconvexity strength of the objective", [](ExperimentConfig& c, double v) { c.c = v; });
  o.add<double>(app, "--alpha", "stepsize", [](ExperimentConfig& c, double v) { c.hp.alpha = v; });
  o.add<double>(app, "--beta1", "first-moment decay", [](ExperimentConfig& c, double v) { c.hp.beta1 = v; });
  o.add<double>(app, "--beta2", "second-moment decay", [](ExperimentConfig& c, double v) { c.hp.beta2 = v; });
  o.add<double>(app, "--epsilon", "stabilizer", [](ExperimentConfig& c, double v) { c.hp.epsilon = v; });
  o.add<double>(app, "--theta0", "initial parameter", [](ExperimentConfig& c, double v) { c.theta0 = v; });
  o.add<double>(app, "--u0", "initial velocity (second-order model)", [](ExperimentConfig& c, double v) { c.u0 = v; });
  o.add<double>(app, "--t-end", "time horizon", [](ExperimentConfig& c, double v) { c.t_end = v; });
  o.add<double>(app, "--tol", "Picard tolerance on the squared trajectory change",
                [](ExperimentConfig& c, double v) { c.solver.tol = v; });
  o.add<int>(app, "--max-iter", "Picard iteration cap", [](ExperimentConfig& c, int v) { c.solver.max_iter = v; });
  o.add<double>(app, "--relax-init", "initial relaxation weight",
                [](ExperimentConfig& c, double v) { c.solver.relax_init = v; });
  o.add<double>(app, "--relax-max", "largest relaxation weight",
                [](ExperimentConfig& c, double v) { c.solver.relax_max = v; });
  o.add<double>(app, "--relax-increment", "relaxation increase after an error rise",
                [](ExperimentConfig& c, double v) { c.solver.relax_increment = v; });
  o.add<int>(app, "--quad-nodes", "node budget of direct moment quadrature",
             [](ExperimentConfig& c, int v) { c.solver.quad_nodes = v; });
  o.add<int>(app, "--substeps", "grid nodes per alpha for continuous models",
             [](ExperimentConfig& c, int v) { c.solver.substeps = v; });
  o.add<std::vector<double>>(app, "--alphas", "stepsizes of a sweep",
                             [](ExperimentConfig& c, const std::vector<double>& v) { c.alphas = v; });
  o.add<std::vector<double>>(app, "--u0s", "initial velocities of a sweep",
                             [](ExperimentConfig& c, const std::vector<double>& v) { c.u0s = v; });
  o.add<double>(app, "--u0-ref", "reference velocity of velocity-sweep", [](ExperimentConfig& c, double v) { c.u0_ref = v; });
  o.add<double>(app, "--delta", "start of the post-transient window", [](ExperimentConfig& c, double v) { c.delta = v; });
  o.add<double>(app, "--window", "envelope window length", [](ExperimentConfig& c, double v) { c.window = v; });
  o.add<double>(app, "--tail-fraction", "share of the horizon used to estimate the offset",
                [](ExperimentConfig& c, double v) { c.tail_fraction = v; });
  o.add<double>(app, "--beta", "decay factor examined by kernel-check",
                [](ExperimentConfig& c, double v) { c.kernel_beta = v; });
  o.add<std::string>(app, "-o,--output", "output directory", [](ExperimentConfig& c, const std::string& v) { c.output = v; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Adam and its nonlocal continuous-time models"};
  app.require_subcommand(1);

  struct Sub {
    nladam::Command command;
    const char* help;
    CLI::App* app = nullptr;
    Overrides overrides;
  };
  std::vector<Sub> subs = {
      {nladam::Command::Simulate, "run one model and write its trajectory"},
      {nladam::Command::SweepAlpha, "final-time errors of the continuous models against discrete Adam"},
      {nladam::Command::BasinScan, "terminal minimizer across stepsizes in the bistable landscape"},
      {nladam::Command::EnvelopeFit, "fit an exponential-plus-offset bound to the residual envelope"},
      {nladam::Command::VelocitySweep, "post-transient sensitivity to the initial velocity"},
      {nladam::Command::KernelCheck, "moment identities and reflection residuals of one memory kernel"},
      {nladam::Command::Compare, "discrete, first-order and second-order trajectories at matched times"},
  };

  std::string config_path;
  bool print_config = false;
  for (auto& s : subs) {
    s.app = app.add_subcommand(nladam::to_string(s.command), s.help);
    s.app->add_option("--config", config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    s.app->add_flag("--print-config", print_config, "print the resolved config and exit");
    add_flags(s.app, s.overrides);
  }

  CLI11_PARSE(app, argc, argv);

  ExperimentConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      config = nladam::config_from_json(nlohmann::json::parse(in));
    }
    for (auto& s : subs) {
      if (!s.app->parsed()) continue;
      config.command = s.command;
      s.overrides.apply(config);
    }
    config = config.resolved();
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (print_config) {
    std::cout << nladam::to_json(config).dump(2) << "\n";
    return 0;
  }

  nladam::ExperimentOutput out;
  try {
    out = nladam::run_experiment(config);
  } catch (const nladam::SolverError& e) {
    std::cerr << "solver aborted: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    nladam::write_artifacts(out, config.output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  for (const auto& a : out.artifacts) std::cout << config.output << "/" << a.name << "\n";
  if (!out.converged) std::cerr << "warning: a continuous run did not reach the solver tolerance\n";
  return 0;
}

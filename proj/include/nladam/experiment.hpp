#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nladam/adam.hpp"
#include "nladam/diagnostics.hpp"
#include "nladam/solver.hpp"
#include "nladam/trajectory.hpp"

namespace nladam {

enum class Command { Simulate, SweepAlpha, BasinScan, EnvelopeFit, VelocitySweep, KernelCheck, Compare };
enum class Model { Discrete, FirstOrder, SecondOrder };

const char* to_string(Command command);
const char* to_string(Model model);
std::optional<Command> parse_command(std::string_view name);
std::optional<Model> parse_model(std::string_view name);

/// Everything that determines a run. No field is random.
struct ExperimentConfig {
  Command command = Command::Simulate;
  Model model = Model::Discrete;
  double c = 1.5;
  AdamHyperParams hp{1e-3, 0.99, 0.999, 1e-8};
  AdamMode adam_mode = AdamMode::Isotropic;
  double theta0 = -1.5;
  double u0 = 0.0;
  /// resolved() sets 2 when unset, except for basin-scan, which then picks a horizon per alpha
  std::optional<double> t_end;
  SolverConfig solver;
  std::string output = "out";

  // sweeps; empty lists are filled per command by resolved()
  std::vector<double> alphas;
  std::vector<double> u0s;
  double u0_ref = 0.0;

  // envelope fit and post-transient windows
  double delta = 1.0;
  double window = kEnvelopeWindow;
  double tail_fraction = kTailFraction;

  // kernel-check
  double kernel_beta = 0.2;

  bool operator==(const ExperimentConfig&) const = default;

  void validate() const;
  /// Copy with every command-specific default made explicit.
  ExperimentConfig resolved() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Keys missing from j keep their value in base; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, const ExperimentConfig& base = {});

struct Artifact {
  std::string name;
  std::string content;
};

struct ExperimentOutput {
  std::vector<Artifact> artifacts;  // manifest.json last
  bool converged = true;            // every continuous run reached the tolerance
};

/// Runs the command and renders its artifacts in memory. Throws SolverError on NaN.
ExperimentOutput run_experiment(const ExperimentConfig& config);

void write_artifacts(const ExperimentOutput& out, const std::filesystem::path& dir);

/// %.17g, with nan and inf spelled out.
std::string format_double(double x);

std::string trajectory_csv(const Trajectory& traj);
std::string sweep_csv(const std::vector<ErrorScalingRow>& rows);
std::string basin_csv(const std::vector<BasinRow>& rows);
std::string velocity_csv(const std::vector<VelocityRow>& rows);

struct KernelCheckReport {
  double beta = 0.0;
  double alpha = 0.0;
  double moments[3] = {0, 0, 0};   // numerical int s^k H(s) ds
  double expected[3] = {0, 0, 0};  // 1, alpha/(1-beta), (1+beta)(alpha/(1-beta))^2
  double rel_error[3] = {0, 0, 0};
  bool underdamped = false;
  double reflection_residual = 0.0;  // max |K(s+delta) + q K(s)|, absolute
  double q = 0.0;
  double worst_truncated_ratio = 0.0;  // max A- / (q A+) over sampled horizons
  bool pass = false;
};

KernelCheckReport kernel_check(double beta, double alpha);
nlohmann::json to_json(const KernelCheckReport& report);

}  // namespace nladam

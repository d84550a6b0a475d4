#include <cmath>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "nladam/experiment.hpp"

using namespace nladam;

namespace {

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char ch : s) n += ch == '\n';
  return n;
}

const Artifact& find(const ExperimentOutput& out, const std::string& name) {
  for (const auto& a : out.artifacts) {
    if (a.name == name) return a;
  }
  throw std::runtime_error("missing artifact " + name);
}

}  // namespace

TEST_CASE("command and model names round-trip") {
  for (auto c : {Command::Simulate, Command::SweepAlpha, Command::BasinScan, Command::EnvelopeFit,
                 Command::VelocitySweep, Command::KernelCheck, Command::Compare}) {
    CHECK(parse_command(to_string(c)) == c);
  }
  for (auto m : {Model::Discrete, Model::FirstOrder, Model::SecondOrder}) CHECK(parse_model(to_string(m)) == m);
  CHECK_FALSE(parse_command("simulat").has_value());
}

TEST_CASE("defaults") {
  const ExperimentConfig c = ExperimentConfig{}.resolved();
  CHECK(c.command == Command::Simulate);
  CHECK(c.model == Model::Discrete);
  CHECK(c.c == 1.5);
  CHECK(c.hp == AdamHyperParams{1e-3, 0.99, 0.999, 1e-8});
  CHECK(c.theta0 == -1.5);
  CHECK(c.t_end == 2.0);
  CHECK(c.u0 == 0.0);

  ExperimentConfig sweep;
  sweep.command = Command::SweepAlpha;
  CHECK(sweep.resolved().alphas == std::vector<double>{5e-4, 1e-3, 2e-3, 5e-3, 1e-2});
  ExperimentConfig basin;
  basin.command = Command::BasinScan;
  const auto b = basin.resolved();
  CHECK_FALSE(b.t_end.has_value());
  REQUIRE(b.alphas.size() == 8);
  CHECK(b.alphas.front() == doctest::Approx(1e-4));
  CHECK(b.alphas.back() == doctest::Approx(1e-1));
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);  // c = 1.5 is not bistable
}

TEST_CASE("config JSON round-trip") {
  ExperimentConfig c;
  c.command = Command::VelocitySweep;
  c.model = Model::SecondOrder;
  c.c = 4.0;
  c.hp = {0.0123, 0.5, 0.2, 3e-9};
  c.adam_mode = AdamMode::Coordinatewise;
  c.theta0 = 0.1 + 0.2;
  c.u0 = -1.0 / 3.0;
  c.t_end = 7.25;
  c.solver.tol = 1e-7;
  c.solver.substeps = 3;
  c.alphas = {1e-3, 0.1 / 3};
  c.u0s = {-1, 2};
  c.u0_ref = 0.5;
  c.delta = 0.75;
  c.window = 0.05;
  c.tail_fraction = 0.2;
  c.kernel_beta = 0.4;
  c.output = "some/dir";
  const auto text = to_json(c).dump();
  CHECK(config_from_json(nlohmann::json::parse(text)) == c);

  const ExperimentConfig d = ExperimentConfig{}.resolved();
  CHECK(config_from_json(to_json(d)) == d);
  ExperimentConfig unset;
  CHECK(config_from_json(to_json(unset)) == unset);
}

TEST_CASE("partial and malformed configs") {
  const auto c = config_from_json(nlohmann::json::parse(R"({"alpha": 0.01, "solver": {"tol": 1e-6}})"));
  CHECK(c.hp.alpha == 0.01);
  CHECK(c.hp.beta1 == 0.99);
  CHECK(c.solver.tol == 1e-6);
  CHECK(c.solver.max_iter == 1000);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"alpah": 0.01})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"model": "third-order"})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"solver": {"tolerance": 1}})")), std::invalid_argument);
  CHECK_THROWS(config_from_json(nlohmann::json::parse(R"({"alpha": "big"})")));
}

TEST_CASE("float formatting keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-1.5) == "-1.5");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("discrete simulate writes K + 1 rows") {
  ExperimentConfig c;
  c.c = 0.0;
  c.t_end = 10.0;
  const auto out = run_experiment(c);
  const auto& csv = find(out, "trajectory.csv").content;
  CHECK(count_lines(csv) == 10002);
  CHECK(csv.rfind("t,theta,m,v,f,grad_norm,eta,eps_t,is_matched_time\n", 0) == 0);
  CHECK(out.artifacts.back().name == "manifest.json");
  const auto manifest = nlohmann::json::parse(out.artifacts.back().content);
  CHECK(config_from_json(manifest.at("config")) == c.resolved());
  CHECK(manifest.at("converged") == true);
}

TEST_CASE("second-order simulate emits the fine grid with matched-time flags") {
  ExperimentConfig c;
  c.model = Model::SecondOrder;
  c.hp.alpha = 1e-2;
  c.t_end = 0.5;
  c.u0 = 1.0;
  const auto out = run_experiment(c);
  const auto& csv = find(out, "trajectory.csv").content;
  CHECK(csv.rfind("t,theta,u,m,v,f,grad_norm,eta,eps_t,is_matched_time\n", 0) == 0);
  CHECK(count_lines(csv) == 252);
  const auto second_row = csv.substr(csv.find('\n') + 1);
  CHECK(second_row.substr(0, second_row.find('\n')).back() == '1');
  const auto manifest = nlohmann::json::parse(out.artifacts.back().content);
  CHECK(manifest.at("runs").at(0).at("converged") == true);
  CHECK(manifest.at("runs").at(0).contains("iterations"));
}

TEST_CASE("artifacts are reproducible byte for byte") {
  ExperimentConfig c;
  c.command = Command::Compare;
  c.hp = {1e-2, 0.5, 0.2, 1e-8};
  c.t_end = 1.0;
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  REQUIRE(a.artifacts.size() == b.artifacts.size());
  for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
    CHECK(a.artifacts[i].name == b.artifacts[i].name);
    CHECK(a.artifacts[i].content == b.artifacts[i].content);
  }
  CHECK(count_lines(find(a, "compare.csv").content) == 102);
}

TEST_CASE("kernel-check passes for the shipped decay factors") {
  for (double beta : {0.0, 0.2, 0.4, 0.5, 0.9, 0.99}) {
    for (double alpha : {1e-3, 1e-2}) {
      const auto r = kernel_check(beta, alpha);
      INFO("beta=" << beta << " alpha=" << alpha);
      CHECK(r.pass);
      CHECK(r.underdamped == (beta < 0.5));
      for (int k = 0; k < 3; ++k) CHECK(r.rel_error[k] <= 1e-6);
    }
  }
  const auto j = to_json(kernel_check(0.9, 1e-2));
  CHECK(j.at("reflection").is_null());
  CHECK(j.at("regime") == "overdamped");
}

TEST_CASE("csv writers") {
  ErrorScalingRow r{1e-3, DynamicsKind::SecondOrder, -1.0, 0.5, 0.25, true};
  CHECK(sweep_csv({r}) == "alpha,model,u0,E_T,E_fT\n0.001,second,-1,0.5,0.25\n");
  BasinRow b;
  b.alpha = 0.5;
  b.final_discrete = 1.0;
  b.final_second = 0.5;
  b.basin_discrete = 1.0;
  CHECK(basin_csv({b}) ==
        "alpha,final_theta_discrete,final_theta_second,basin_discrete,basin_second\n0.5,1,0.5,1,nan\n");
  CHECK(velocity_csv({VelocityRow{0.01, 2.0, 0.25, 0.5, true}}) == "alpha,u0,delta_theta,delta_phi\n0.01,2,0.25,0.5\n");
}

// Copyright 2026 The vhmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any gating criterion fails. The long RL training check is
// opt-in (VHMPC_STRETCH=1 or --stretch) and never gates.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vhmpc/oracles.hpp"
#include "vhmpc/sac.hpp"
#include "vhmpc/scenario_io.hpp"
#include "vhmpc/selftest.hpp"
#include "vhmpc/sim.hpp"

namespace {

using namespace vhmpc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Criterion {
  std::string name;
  bool passed = false;
  bool skipped = false;
  bool gating = true;
  std::string detail;
};

std::vector<Criterion> g_results;

void record(const std::string& name, bool passed, const std::string& detail,
            double seconds, std::optional<double> budget = std::nullopt,
            bool gating = true) {
  Criterion c;
  c.name = name;
  c.passed = passed && (!budget || seconds <= *budget);
  c.gating = gating;
  std::ostringstream os;
  os << detail;
  os.precision(1);
  os << std::fixed << " [" << seconds << "s";
  if (budget) os << " / budget " << *budget << "s";
  os << "]";
  if (budget && seconds > *budget) os << " OVER BUDGET";
  c.detail = os.str();
  g_results.push_back(c);
  std::printf("[%s] %s — %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
              c.detail.c_str());
  std::fflush(stdout);
}

void record_skip(const std::string& name, const std::string& why) {
  Criterion c;
  c.name = name;
  c.skipped = true;
  c.passed = true;
  c.gating = false;
  c.detail = why;
  g_results.push_back(c);
  std::printf("[SKIP] %s — %s\n", name.c_str(), why.c_str());
}

double run_timed(const std::function<void()>& fn) {
  const auto t0 = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// --- criteria ---------------------------------------------------------------

void check_prediction() {
  selftest::SuiteResult suite;
  const double secs =
      run_timed([&] { suite = selftest::prediction_suite(1000, 90001); });
  record("stacked-prediction-equivalence", suite.passed, suite.detail, secs, 5.0);
}

void check_qp_oracle() {
  selftest::SuiteResult suite;
  const double secs =
      run_timed([&] { suite = selftest::qp_oracle_suite(200, 90002); });
  record("qp-oracle-equivalence", suite.passed, suite.detail, secs, 30.0);
}

void check_gradients() {
  selftest::SuiteResult suite;
  double actor_err = 0.0;
  const double secs = run_timed([&] {
    suite = selftest::gradient_suite(50, 90003);
    // actor loss on a frozen batch
    sac::SacConfig cfg;
    cfg.hidden_width = 12;
    sac::Agent agent = sac::make_agent(2, cfg, 90004);
    Rng rng(90005);
    nn::Mat states(8, 4), noise(8, 2);
    for (double& v : states.d) v = rng.uniform(-3.0, 3.0);
    for (double& v : noise.d) v = rng.normal();
    nn::Gradients analytic = nn::zero_gradients(agent.policy.net);
    sac::actor_objective(agent, states, noise, &analytic);
    const nn::Gradients fd = oracles::finite_difference_gradients(
        agent.policy.net,
        [&] { return sac::actor_objective(agent, states, noise, nullptr); },
        1e-6);
    actor_err = oracles::relative_gradient_error(analytic, fd);
  });
  const bool ok = suite.passed && actor_err <= 1e-3;
  std::ostringstream os;
  os << suite.detail << "; actor-loss relative error " << actor_err;
  record("gradient-checks", ok, os.str(), secs, 60.0);
}

void check_collision_property() {
  selftest::SuiteResult suite;
  const double secs =
      run_timed([&] { suite = selftest::collision_suite(500, 90006); });
  record("collision-half-space-property", suite.passed, suite.detail, secs);
}

void check_two_robot(const fs::path& scenario_dir) {
  EpisodeResult res;
  double max_sym_dev = 0.0;
  int pre_activation_steps = 0;
  const double secs = run_timed([&] {
    Scenario sc = io::load_scenario((scenario_dir / "two_robot_setpoint.json").string());
    sc.mode = HorizonMode::kFixed;
    sc.fixed_horizon = 30;
    res = run_episode(sc);

    // u_{y,1} == u_{x,2} until the first collision row appears anywhere
    int first_activation = res.steps;
    for (const auto& r : res.records) {
      if (r.active_constraints > 0) {
        first_activation = std::min(first_activation, r.step);
      }
    }
    pre_activation_steps = first_activation;
    for (const auto& r : res.records) {
      if (r.step >= first_activation) continue;
      static Vec2 u0, u1;
      if (r.robot == 0) u0 = r.input;
      if (r.robot == 1) {
        u1 = r.input;
        max_sym_dev = std::max(max_sym_dev, std::abs(u0.y() - u1.x()));
      }
    }
  });
  const bool ok = res.termination == Termination::kAllArrived &&
                  res.steps <= 350 &&
                  res.metrics.min_pairwise_distance >= 0.75 &&
                  pre_activation_steps > 0 && max_sym_dev <= 1e-9;
  std::ostringstream os;
  os << termination_name(res.termination) << " in " << res.steps
     << " steps, min distance " << res.metrics.min_pairwise_distance
     << ", symmetry dev " << max_sym_dev << " over " << pre_activation_steps
     << " pre-activation steps";
  record("two-robot-set-point", ok, os.str(), secs, 120.0);
}

void check_fourteen_robot(const fs::path& scenario_dir) {
  EpisodeResult res;
  const double secs = run_timed([&] {
    Scenario sc =
        io::load_scenario((scenario_dir / "fourteen_robot_exchange.json").string());
    sc.mode = HorizonMode::kFixed;
    sc.fixed_horizon = 20;
    res = run_episode(sc);
  });
  const bool ok = res.termination == Termination::kAllArrived &&
                  res.metrics.min_pairwise_distance >= 0.75;
  std::ostringstream os;
  os << termination_name(res.termination) << " in " << res.steps
     << " steps, min distance " << res.metrics.min_pairwise_distance
     << ", activations " << res.metrics.constraint_activations << ", path cost "
     << res.metrics.path_cost;
  record("fourteen-robot-exchange", ok, os.str(), secs, 600.0);
}

void check_on_demand() {
  EpisodeResult res;
  const double secs = run_timed([&] {
    // goals confined to disjoint half planes; nobody ever gets close
    Scenario sc;
    sc.robots = {{{0, 0}, {6, 0}}, {{60, 0}, {66, 0}}, {{0, 60}, {6, 60}},
                 {{60, 60}, {66, 60}}};
    sc.fixed_horizon = 30;
    res = run_episode(sc);
  });
  const bool ok = res.termination == Termination::kAllArrived &&
                  res.metrics.constraint_activations == 0;
  std::ostringstream os;
  os << termination_name(res.termination) << ", "
     << res.metrics.constraint_activations << " collision constraints";
  record("on-demand-zero-constraints", ok, os.str(), secs);
}

void check_determinism(const fs::path& scenario_dir, const std::string& cli) {
  bool ok = true;
  std::string detail;
  const double secs = run_timed([&] {
    const fs::path tmp =
        fs::temp_directory_path() / ("vhmpc_accept_" + std::to_string(::getpid()));
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const std::string sc = (scenario_dir / "two_robot_setpoint.json").string();

    auto files_equal = [](const fs::path& a, const fs::path& b) {
      return slurp(a) == slurp(b) && !slurp(a).empty();
    };

    if (!cli.empty()) {
      auto shell = [&](const std::string& cmd) {
        return std::system((cmd + " > /dev/null 2>&1").c_str()) == 0;
      };
      // run twice
      ok &= shell(cli + " run --scenario " + sc + " --out " + (tmp / "r1").string());
      ok &= shell(cli + " run --scenario " + sc + " --out " + (tmp / "r2").string());
      ok &= files_equal(tmp / "r1/trajectory.csv", tmp / "r2/trajectory.csv");
      ok &= files_equal(tmp / "r1/metrics.json", tmp / "r2/metrics.json");
      if (!ok) detail = "run artifacts differ; ";
      // compare twice
      bool cmp_ok = true;
      cmp_ok &= shell(cli + " compare --scenario " + sc + " --horizons 10,30 --out " +
                      (tmp / "c1").string());
      cmp_ok &= shell(cli + " compare --scenario " + sc + " --horizons 10,30 --out " +
                      (tmp / "c2").string());
      cmp_ok &= files_equal(tmp / "c1/comparison.csv", tmp / "c2/comparison.csv");
      if (!cmp_ok) detail += "compare artifacts differ; ";
      ok &= cmp_ok;
      // short training twice (policy-path determinism incl. sampling)
      bool train_ok = true;
      const std::string train_args = " train --scenario " + sc +
                                     " --episodes 2 --seed 5 --out ";
      train_ok &= shell(cli + train_args + (tmp / "t1").string());
      train_ok &= shell(cli + train_args + (tmp / "t2").string());
      train_ok &= files_equal(tmp / "t1/training_log.csv", tmp / "t2/training_log.csv");
      train_ok &= files_equal(tmp / "t1/checkpoint.bin", tmp / "t2/checkpoint.bin");
      if (!train_ok) detail += "train artifacts differ; ";
      ok &= train_ok;
      if (ok) detail = "run, compare and train rerun byte-identical via CLI";
    } else {
      // in-process fallback
      Scenario scenario = io::load_scenario(sc);
      const std::string a = io::trajectory_csv(run_episode(scenario));
      const std::string b = io::trajectory_csv(run_episode(scenario));
      ok = !a.empty() && a == b;
      detail = "CLI path not provided; in-process rerun compared";
    }
    fs::remove_all(tmp);
  });
  record("seed-determinism", ok, detail, secs);
}

void check_training_stretch(const fs::path& scenario_dir, bool enabled) {
  if (!enabled) {
    record_skip("rl-training-stretch",
                "non-gating; set VHMPC_STRETCH=1 (or pass --stretch) to run "
                "5 seeds x 300 episodes");
    return;
  }
  bool ok = false;
  std::ostringstream os;
  const double secs = run_timed([&] {
    Scenario sc = io::load_scenario((scenario_dir / "two_robot_setpoint.json").string());

    double best_fixed = std::numeric_limits<double>::infinity();
    for (int h : {10, 20, 30}) {
      Scenario fixed = sc;
      fixed.mode = HorizonMode::kFixed;
      fixed.fixed_horizon = h;
      const EpisodeResult res = run_episode(fixed);
      if (res.termination == Termination::kAllArrived)
        best_fixed = std::min(best_fixed, res.metrics.path_cost);
    }

    double best_policy = std::numeric_limits<double>::infinity();
    bool any_clean = false;
    bool horizons_in_range = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      sac::Agent agent = sac::make_agent(2, {}, seed);
      sac::train(agent, sc, 300);
      sac::PolicySelector selector(agent, sc.params.n_max);
      Scenario eval = sc;
      eval.mode = HorizonMode::kFixed;  // selector overrides the horizons
      const EpisodeResult res = run_episode(eval, selector);
      for (const auto& rec : res.records) {
        horizons_in_range &= rec.horizon >= 1 && rec.horizon <= 49;
      }
      if (res.termination == Termination::kAllArrived &&
          res.metrics.min_pairwise_distance >= 0.75) {
        any_clean = true;
        best_policy = std::min(best_policy, res.metrics.path_cost);
      }
      std::printf("  seed %llu: %s, path cost %.3f (best fixed %.3f)\n",
                  static_cast<unsigned long long>(seed),
                  termination_name(res.termination), res.metrics.path_cost,
                  best_fixed);
      std::fflush(stdout);
    }
    ok = any_clean && horizons_in_range && best_policy <= 1.10 * best_fixed;
    os << "best policy path cost " << best_policy << " vs best fixed "
       << best_fixed << (horizons_in_range ? "" : "; horizon out of range");
  });
  record("rl-training-stretch", ok, os.str(), secs, 7200.0, /*gating=*/false);
}

}  // namespace

int main(int argc, char** argv) {
  fs::path scenario_dir = "scenarios";
  std::string cli;
  bool stretch = std::getenv("VHMPC_STRETCH") != nullptr;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--scenario-dir" && i + 1 < argc) scenario_dir = argv[++i];
    if (arg == "--cli" && i + 1 < argc) cli = argv[++i];
    if (arg == "--stretch") stretch = true;
  }

  check_prediction();
  check_qp_oracle();
  check_gradients();
  check_collision_property();
  check_two_robot(scenario_dir);
  check_fourteen_robot(scenario_dir);
  check_on_demand();
  check_determinism(scenario_dir, cli);
  check_training_stretch(scenario_dir, stretch);

  int failed = 0;
  for (const auto& c : g_results) {
    if (c.gating && !c.passed) ++failed;
  }
  std::printf("\n%zu criteria, %d gating failure%s\n", g_results.size(), failed,
              failed == 1 ? "" : "s");
  return failed == 0 ? 0 : 1;
}

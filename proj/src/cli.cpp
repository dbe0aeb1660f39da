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

#include "vhmpc/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vhmpc/parallel.hpp"
#include "vhmpc/sac.hpp"
#include "vhmpc/scenario_io.hpp"
#include "vhmpc/selftest.hpp"
#include "vhmpc/sim.hpp"

namespace vhmpc::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kTaskFailure = 2;

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0 = library default
};

void add_common(CLI::App* cmd, CommonOpts* opts, bool needs_out = true) {
  cmd->add_option("--scenario", opts->scenario_path, "Scenario JSON file")
      ->required();
  auto* out = cmd->add_option("--out", opts->out_dir,
                              "Output directory (created if missing)");
  if (needs_out) out->required();
  cmd->add_option("--seed", opts->seed, "Override the scenario seed");
  cmd->add_option("--threads", opts->threads,
                  "Worker threads for the per-robot solves (0 = auto)");
}

Scenario load_common(const CommonOpts& opts) {
  Scenario sc = io::load_scenario(opts.scenario_path);
  if (opts.seed) sc.seed = *opts.seed;
  if (opts.threads > 0) parallel::set_max_threads(opts.threads);
  if (!opts.out_dir.empty()) fs::create_directories(opts.out_dir);
  return sc;
}

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

int episode_exit_code(const EpisodeResult& result) {
  return result.termination == Termination::kAllArrived ? kOk : kTaskFailure;
}

void write_episode_outputs(const std::string& out_dir, const EpisodeResult& result) {
  io::write_file(join(out_dir, "trajectory.csv"), io::trajectory_csv(result));
  io::write_file(join(out_dir, "metrics.json"), io::metrics_json(result));
}

int run_episode_command(const CommonOpts& opts, std::optional<int> horizon,
                        const std::string& checkpoint,
                        std::optional<bool> terminate_on_collision) {
  Scenario sc = load_common(opts);
  if (horizon && !checkpoint.empty()) {
    std::fprintf(stderr, "error: --horizon and --checkpoint are exclusive\n");
    return kUsageError;
  }
  if (horizon) {
    sc.mode = HorizonMode::kFixed;
    sc.fixed_horizon = *horizon;
  } else if (!checkpoint.empty()) {
    sc.mode = HorizonMode::kPolicy;
    sc.policy_checkpoint = checkpoint;
  }
  if (terminate_on_collision) sc.terminate_on_collision = *terminate_on_collision;
  sc.validate();

  EpisodeResult result;
  if (sc.mode == HorizonMode::kPolicy) {
    const sac::Agent agent = sac::load_agent_file(sc.policy_checkpoint);
    if (agent.n_robots != static_cast<int>(sc.robots.size())) {
      std::fprintf(stderr,
                   "error: checkpoint was trained for %d robots, scenario has %zu\n",
                   agent.n_robots, sc.robots.size());
      return kUsageError;
    }
    sac::PolicySelector selector(agent, sc.params.n_max);
    result = run_episode(sc, selector);
  } else {
    result = run_episode(sc);
  }
  write_episode_outputs(opts.out_dir, result);
  std::printf("%s: steps=%d path_cost=%s activations=%ld wall=%.3fs\n",
              termination_name(result.termination), result.steps,
              io::format_double(result.metrics.path_cost).c_str(),
              result.metrics.constraint_activations, result.metrics.wall_time);
  return episode_exit_code(result);
}

int train_command(const CommonOpts& opts, int episodes,
                  std::optional<bool> terminate_on_collision) {
  Scenario sc = load_common(opts);
  sac::SacConfig cfg;
  if (terminate_on_collision) cfg.terminate_on_collision = *terminate_on_collision;
  sac::Agent agent =
      sac::make_agent(static_cast<int>(sc.robots.size()), cfg, sc.seed);
  const sac::TrainResult result = sac::train(agent, sc, episodes);
  sac::save_agent_file(join(opts.out_dir, "checkpoint.bin"), agent);
  io::write_file(join(opts.out_dir, "training_log.csv"),
                 io::training_log_csv(result.log));
  if (!result.log.empty()) {
    const auto& last = result.log.back();
    std::printf("trained %d episodes; last: return=%s steps=%d path_cost=%s\n",
                episodes, io::format_double(last.episode_return).c_str(),
                last.steps, io::format_double(last.path_cost).c_str());
  } else {
    std::printf("trained 0 episodes; wrote initial checkpoint\n");
  }
  return kOk;
}

int compare_command(const CommonOpts& opts, const std::vector<int>& horizons,
                    const std::string& checkpoint) {
  Scenario sc = load_common(opts);
  std::unique_ptr<sac::Agent> agent;
  std::unique_ptr<sac::PolicySelector> selector;
  if (!checkpoint.empty()) {
    agent = std::make_unique<sac::Agent>(sac::load_agent_file(checkpoint));
    if (agent->n_robots != static_cast<int>(sc.robots.size())) {
      std::fprintf(stderr, "error: checkpoint robot count mismatch\n");
      return kUsageError;
    }
    selector = std::make_unique<sac::PolicySelector>(*agent, sc.params.n_max);
  }
  const auto rows = compare(sc, horizons, selector.get());
  io::write_file(join(opts.out_dir, "comparison.csv"), io::comparison_csv(rows));
  for (const auto& row : rows) {
    std::printf("%-10s path_cost=%-12s activations=%-6ld steps=%-5d %s wall=%.3fs\n",
                row.label.c_str(), io::format_double(row.path_cost).c_str(),
                row.activations, row.steps,
                row.completed ? "completed" : "INCOMPLETE", row.wall_time);
  }
  return kOk;
}

int selftest_command() {
  const auto results = selftest::run_all();
  bool all_ok = true;
  for (const auto& r : results) {
    std::printf("[%s] %s (%s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    all_ok = all_ok && r.passed;
  }
  return all_ok ? kOk : kUsageError;
}

}  // namespace

int run_command(int argc, const char* const* argv) {
  CLI::App app{"Variable-horizon multi-robot MPC with on-demand collision "
               "avoidance and a SAC horizon policy"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  std::optional<int> run_horizon;
  std::string run_checkpoint;
  std::optional<bool> run_toc;
  auto* run_cmd = app.add_subcommand("run", "Run one episode");
  add_common(run_cmd, &run_opts);
  run_cmd->add_option("--horizon", run_horizon, "Force a fixed horizon");
  run_cmd->add_option("--checkpoint", run_checkpoint, "Run with a trained policy");
  run_cmd->add_option("--terminate-on-collision", run_toc,
                      "Stop the episode when robots come within 0.5*r_min");

  CommonOpts train_opts;
  int train_episodes = 0;
  std::optional<bool> train_toc;
  auto* train_cmd = app.add_subcommand("train", "Train the horizon policy");
  add_common(train_cmd, &train_opts);
  train_cmd->add_option("--episodes", train_episodes, "Training episodes")
      ->required();
  train_cmd->add_option("--terminate-on-collision", train_toc,
                        "End training episodes on collision");

  CommonOpts eval_opts;
  std::string eval_checkpoint;
  auto* eval_cmd = app.add_subcommand("eval", "Run the deterministic policy");
  add_common(eval_cmd, &eval_opts);
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "Trained checkpoint")
      ->required();

  CommonOpts cmp_opts;
  std::vector<int> cmp_horizons;
  std::string cmp_checkpoint;
  auto* cmp_cmd =
      app.add_subcommand("compare", "Sweep fixed horizons (and a policy)");
  add_common(cmp_cmd, &cmp_opts);
  cmp_cmd->add_option("--horizons", cmp_horizons, "Fixed horizons to sweep")
      ->required()
      ->delimiter(',');
  cmp_cmd->add_option("--checkpoint", cmp_checkpoint, "Also run this policy");

  auto* selftest_cmd =
      app.add_subcommand("selftest", "Run the built-in property suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsageError;
  }

  try {
    if (run_cmd->parsed())
      return run_episode_command(run_opts, run_horizon, run_checkpoint, run_toc);
    if (train_cmd->parsed())
      return train_command(train_opts, train_episodes, train_toc);
    if (eval_cmd->parsed())
      return run_episode_command(eval_opts, std::nullopt, eval_checkpoint,
                                 std::nullopt);
    if (cmp_cmd->parsed())
      return compare_command(cmp_opts, cmp_horizons, cmp_checkpoint);
    if (selftest_cmd->parsed()) return selftest_command();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace vhmpc::cli

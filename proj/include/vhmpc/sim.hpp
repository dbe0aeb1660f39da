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

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "vhmpc/collision.hpp"
#include "vhmpc/mpc.hpp"
#include "vhmpc/prediction.hpp"

namespace vhmpc {

struct ScenarioRobot {
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
};

struct ScenarioParams {
  double h = 0.2;
  double q = 5.0;
  double w = 10.0;
  double r_min = 1.5;
  double ub = 1.5;
  double lb = -1.5;
  int max_steps = 350;  // K
  double lambda_h = 0.001;
  double e_bar = 0.1;
  int n_max = 49;
};

enum class HorizonMode { kFixed, kPolicy };

struct Scenario {
  std::vector<ScenarioRobot> robots;
  std::vector<Obstacle> obstacles;
  ScenarioParams params;
  HorizonMode mode = HorizonMode::kFixed;
  int fixed_horizon = 30;
  std::string policy_checkpoint;  // used when mode == kPolicy
  std::uint64_t seed = 0;
  bool terminate_on_collision = true;

  void validate() const;
  MpcConfig mpc_config() const;
};

struct StepRecord {
  int step = 0;
  int robot = 0;
  Vec2 position = Vec2::Zero();  // measured state the input was computed from
  Vec2 input = Vec2::Zero();
  int horizon = 0;
  int active_constraints = 0;
};

enum class Termination { kAllArrived, kTimeout, kCollision };

const char* termination_name(Termination t);

struct Metrics {
  double path_cost = 0.0;
  long constraint_activations = 0;
  double completion_time = 0.0;  // steps * h
  double min_pairwise_distance = std::numeric_limits<double>::infinity();
  double wall_time = 0.0;  // measured; never written into artifacts
};

struct EpisodeResult {
  std::vector<StepRecord> records;
  Metrics metrics;
  Termination termination = Termination::kTimeout;
  int steps = 0;
  int qp_fallbacks = 0;
  std::vector<Vec2> final_positions;
};

long count_activations(const EpisodeResult& result);

// Supplies per-robot horizons for the upcoming step given the concatenated
// measured positions of all robots.
class HorizonSelector {
 public:
  virtual ~HorizonSelector() = default;
  virtual std::vector<int> select(const VecX& joint_positions) = 0;
};

class FixedHorizonSelector final : public HorizonSelector {
 public:
  FixedHorizonSelector(int horizon, int n_robots)
      : horizons_(static_cast<size_t>(n_robots), horizon) {}
  std::vector<int> select(const VecX&) override { return horizons_; }

 private:
  std::vector<int> horizons_;
};

// Per-step signals needed by a learning loop sitting on top of the runner.
struct StepOutcome {
  int step_index = 0;  // k of the step just executed
  std::vector<Vec2> positions_before;
  std::vector<Vec2> positions_after;
  std::vector<bool> collided;       // within 0.5*r_min after the step
  std::vector<bool> arrived_first;  // first entry within e_bar
  bool finished = false;
  Termination termination = Termination::kTimeout;
};

// Receding-horizon episode driver. Each step solves every robot's MPC
// against an immutable snapshot of the previous step's predictions (two
// buffers), then applies the first inputs and swaps the snapshot. Per-robot
// solves run on the OpenMP lane; results are merged by robot index, so the
// outcome is identical in serial and parallel execution.
class EpisodeRunner {
 public:
  explicit EpisodeRunner(const Scenario& scenario);

  bool finished() const { return finished_; }
  Termination termination() const { return termination_; }
  int step_index() const { return k_; }
  int robot_count() const { return static_cast<int>(scenario_.robots.size()); }

  // Concatenated measured positions (the learning state vector).
  VecX joint_positions() const;

  const std::vector<StackedTrajectory>& previous_predictions() const {
    return prev_predictions_;
  }

  StepOutcome step(const std::vector<int>& horizons);

  EpisodeResult result() const;
  const Scenario& scenario() const { return scenario_; }

 private:
  void refresh_min_distance();
  bool all_arrived() const;

  Scenario scenario_;
  ModelParams model_;
  MpcConfig mpc_cfg_;
  std::vector<Vec2> positions_;
  std::vector<StackedTrajectory> prev_predictions_;
  std::vector<VecX> prev_solutions_;
  std::vector<int> prev_horizons_;
  std::vector<bool> arrived_ever_;
  int k_ = 0;
  bool first_step_ = true;
  bool finished_ = false;
  Termination termination_ = Termination::kTimeout;
  std::vector<StepRecord> records_;
  Metrics metrics_;
  int qp_fallbacks_ = 0;
};

EpisodeResult run_episode(const Scenario& scenario, HorizonSelector& selector);

// Fixed-horizon convenience; rejects policy-mode scenarios (the caller must
// supply the policy selector for those).
EpisodeResult run_episode(const Scenario& scenario);

struct ComparisonRow {
  std::string label;
  int horizon = -1;  // -1 for a policy run
  double path_cost = 0.0;
  long activations = 0;
  double completion_time = 0.0;
  int steps = 0;
  bool completed = false;
  Termination termination = Termination::kTimeout;
  double wall_time = 0.0;  // console-only
};

// Runs the scenario once per fixed horizon and once per optional policy
// selector, collecting the headline metrics per run.
std::vector<ComparisonRow> compare(const Scenario& scenario,
                                   const std::vector<int>& horizons,
                                   HorizonSelector* policy = nullptr,
                                   const std::string& policy_label = "policy");

}  // namespace vhmpc

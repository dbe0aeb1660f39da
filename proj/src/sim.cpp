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

#include "vhmpc/sim.hpp"

#include <algorithm>
#include <chrono>

#include "vhmpc/parallel.hpp"

namespace vhmpc {

void Scenario::validate() const {
  require(!robots.empty(), "scenario: needs at least one robot");
  require(params.max_steps >= 1, "scenario: K must be at least 1");
  require(params.h > 0.0, "scenario: h must be positive");
  require(params.r_min > 0.0, "scenario: r_min must be positive");
  require(params.e_bar > 0.0, "scenario: e_bar must be positive");
  require(params.lb < params.ub, "scenario: lb must be below ub");
  require(params.n_max >= 1 && params.n_max <= kMaxHorizon,
          "scenario: N_max out of [1, 49]");
  require(params.q >= 0.0 && params.w > 0.0, "scenario: bad weights");
  for (const auto& r : robots) {
    require(r.start.allFinite() && r.goal.allFinite(), "scenario: non-finite robot");
  }
  for (const auto& o : obstacles) {
    require(o.center.allFinite(), "scenario: non-finite obstacle");
  }
  for (size_t i = 0; i < robots.size(); ++i) {
    for (size_t j = i + 1; j < robots.size(); ++j) {
      require((robots[i].start - robots[j].start).norm() >= params.r_min,
              "scenario: starts closer than r_min");
    }
  }
  if (mode == HorizonMode::kFixed) {
    require(fixed_horizon >= 1 && fixed_horizon <= params.n_max,
            "scenario: fixed horizon out of [1, N_max]");
  }
}

MpcConfig Scenario::mpc_config() const {
  MpcConfig cfg;
  cfg.q_weight = params.q;
  cfg.w_weight = params.w;
  cfg.h = params.h;
  cfg.lb = params.lb;
  cfg.ub = params.ub;
  cfg.r_min = params.r_min;
  return cfg;
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::kAllArrived: return "all_arrived";
    case Termination::kTimeout: return "timeout";
    case Termination::kCollision: return "collision";
  }
  return "unknown";
}

long count_activations(const EpisodeResult& result) {
  long n = 0;
  for (const auto& rec : result.records) n += rec.active_constraints;
  return n;
}

EpisodeRunner::EpisodeRunner(const Scenario& scenario) : scenario_(scenario) {
  scenario_.validate();
  model_ = build_model(scenario_.params.h);
  mpc_cfg_ = scenario_.mpc_config();
  const int n = robot_count();
  positions_.resize(n);
  for (int i = 0; i < n; ++i) positions_[i] = scenario_.robots[i].start;
  prev_predictions_.resize(n);
  prev_solutions_.resize(n);
  prev_horizons_.assign(n, 0);
  arrived_ever_.assign(n, false);
  refresh_min_distance();
  for (int i = 0; i < n; ++i) {
    if ((positions_[i] - scenario_.robots[i].goal).norm() < scenario_.params.e_bar)
      arrived_ever_[i] = true;
  }
  if (all_arrived()) {
    finished_ = true;
    termination_ = Termination::kAllArrived;
  }
}

bool EpisodeRunner::all_arrived() const {
  for (int i = 0; i < robot_count(); ++i) {
    if ((positions_[i] - scenario_.robots[i].goal).norm() >= scenario_.params.e_bar)
      return false;
  }
  return true;
}

void EpisodeRunner::refresh_min_distance() {
  const int n = robot_count();
  double d = metrics_.min_pairwise_distance;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j)
      d = std::min(d, (positions_[i] - positions_[j]).norm());
    for (const auto& o : scenario_.obstacles)
      d = std::min(d, (positions_[i] - o.center).norm());
  }
  metrics_.min_pairwise_distance = d;
}

VecX EpisodeRunner::joint_positions() const {
  VecX s(2 * robot_count());
  for (int i = 0; i < robot_count(); ++i) s.segment<2>(2 * i) = positions_[i];
  return s;
}

StepOutcome EpisodeRunner::step(const std::vector<int>& horizons) {
  require(!finished_, "episode: step() after termination");
  require(static_cast<int>(horizons.size()) == robot_count(),
          "episode: one horizon per robot required");
  for (int h : horizons) {
    require(h >= 1 && h <= scenario_.params.n_max,
            "episode: horizon out of [1, N_max]");
  }
  const int n = robot_count();

  // No predictions exist before the first step: treat every robot as
  // momentarily static over its chosen horizon.
  if (first_step_) {
    for (int i = 0; i < n; ++i)
      prev_predictions_[i] = repeat_point(positions_[i], horizons[i]);
    first_step_ = false;
  }

  StepOutcome out;
  out.step_index = k_;
  out.positions_before = positions_;
  out.collided.assign(n, false);
  out.arrived_first.assign(n, false);

  // Per-robot solves against the immutable previous-step snapshot.
  std::vector<MpcStepResult> results(n);
  std::vector<int> row_counts(n, 0);
  parallel::for_each_index(n, [&](int i) {
    const PredictionMatrices pm = build_prediction_matrices(model_, horizons[i]);
    const RobotState x{positions_[i]};
    const auto constraints = collision_constraints_for_robot(
        i, prev_predictions_, scenario_.obstacles, pm, x, scenario_.params.r_min);
    row_counts[i] = static_cast<int>(constraints.size());
    const VecX* warm = (prev_horizons_[i] == horizons[i] &&
                        prev_solutions_[i].size() == 2 * horizons[i])
                           ? &prev_solutions_[i]
                           : nullptr;
    results[i] = mpc_step(pm, x, DesiredTrajectory{scenario_.robots[i].goal},
                          constraints, mpc_cfg_, warm);
  });

  // Deterministic merge by robot index.
  for (int i = 0; i < n; ++i) {
    records_.push_back({k_, i, positions_[i], results[i].u0.velocity,
                        horizons[i], row_counts[i]});
    metrics_.constraint_activations += row_counts[i];
    if (results[i].used_fallback) ++qp_fallbacks_;

    const Vec2 next = model_.A * positions_[i] + model_.B * results[i].u0.velocity;
    metrics_.path_cost += (next - positions_[i]).norm();
    positions_[i] = next;

    // Shifted solution warm-starts the next step when the horizon repeats.
    VecX& sol = prev_solutions_[i];
    sol = results[i].input_sequence;
    if (sol.size() >= 4) {
      sol.head(sol.size() - 2) = sol.tail(sol.size() - 2).eval();
    }
    prev_horizons_[i] = horizons[i];
    prev_predictions_[i] = results[i].predicted;
  }
  refresh_min_distance();

  const double collision_radius = 0.5 * scenario_.params.r_min;
  bool any_collision = false;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j != i && (positions_[i] - positions_[j]).norm() < collision_radius)
        out.collided[i] = true;
    }
    for (const auto& o : scenario_.obstacles) {
      if ((positions_[i] - o.center).norm() < collision_radius)
        out.collided[i] = true;
    }
    any_collision = any_collision || out.collided[i];

    const double err = (positions_[i] - scenario_.robots[i].goal).norm();
    if (err < scenario_.params.e_bar && !arrived_ever_[i]) {
      arrived_ever_[i] = true;
      out.arrived_first[i] = true;
    }
  }

  ++k_;
  if (any_collision && scenario_.terminate_on_collision) {
    finished_ = true;
    termination_ = Termination::kCollision;
  } else if (all_arrived()) {
    finished_ = true;
    termination_ = Termination::kAllArrived;
  } else if (k_ >= scenario_.params.max_steps) {
    finished_ = true;
    termination_ = Termination::kTimeout;
  }

  out.positions_after = positions_;
  out.finished = finished_;
  out.termination = termination_;
  return out;
}

EpisodeResult EpisodeRunner::result() const {
  EpisodeResult r;
  r.records = records_;
  r.metrics = metrics_;
  r.metrics.completion_time = k_ * scenario_.params.h;
  r.termination = termination_;
  r.steps = k_;
  r.qp_fallbacks = qp_fallbacks_;
  r.final_positions = positions_;
  return r;
}

EpisodeResult run_episode(const Scenario& scenario, HorizonSelector& selector) {
  const auto t0 = std::chrono::steady_clock::now();
  EpisodeRunner runner(scenario);
  while (!runner.finished()) {
    runner.step(selector.select(runner.joint_positions()));
  }
  EpisodeResult result = runner.result();
  result.metrics.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

EpisodeResult run_episode(const Scenario& scenario) {
  require(scenario.mode == HorizonMode::kFixed,
          "run_episode: policy-mode scenario needs a policy selector");
  FixedHorizonSelector selector(scenario.fixed_horizon,
                                static_cast<int>(scenario.robots.size()));
  return run_episode(scenario, selector);
}

std::vector<ComparisonRow> compare(const Scenario& scenario,
                                   const std::vector<int>& horizons,
                                   HorizonSelector* policy,
                                   const std::string& policy_label) {
  std::vector<ComparisonRow> rows;
  auto to_row = [](const EpisodeResult& res, std::string label, int horizon) {
    ComparisonRow row;
    row.label = std::move(label);
    row.horizon = horizon;
    row.path_cost = res.metrics.path_cost;
    row.activations = res.metrics.constraint_activations;
    row.completion_time = res.metrics.completion_time;
    row.steps = res.steps;
    row.completed = res.termination == Termination::kAllArrived;
    row.termination = res.termination;
    row.wall_time = res.metrics.wall_time;
    return row;
  };
  for (int h : horizons) {
    Scenario sc = scenario;
    sc.mode = HorizonMode::kFixed;
    sc.fixed_horizon = h;
    rows.push_back(to_row(run_episode(sc), "fixed_" + std::to_string(h), h));
  }
  if (policy) {
    rows.push_back(to_row(run_episode(scenario, *policy), policy_label, -1));
  }
  return rows;
}

}  // namespace vhmpc

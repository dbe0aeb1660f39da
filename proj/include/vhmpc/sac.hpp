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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vhmpc/nn.hpp"
#include "vhmpc/rng.hpp"
#include "vhmpc/sim.hpp"

namespace vhmpc::sac {

struct SacConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double lr = 3e-4;
  int batch_size = 256;
  int buffer_capacity = 100000;
  int warmup_steps = 1000;
  int updates_per_step = 1;
  int hidden_width = 256;
  // 0 means "use -n_robots" (set when the agent is built).
  double target_entropy = 0.0;
  double initial_log_alpha = 0.0;
  double eps_tanh = 1e-6;
  double log_std_min = -20.0;
  double log_std_max = 2.0;
  bool terminate_on_collision = true;
};

struct Transition {
  std::vector<double> state;
  std::vector<double> action;  // pre-scaling values in [-1, 1]
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);
  void push(Transition t);
  int size() const { return static_cast<int>(data_.size()); }
  int capacity() const { return capacity_; }
  const Transition& at(int i) const { return data_[static_cast<size_t>(i)]; }
  std::vector<int> sample_indices(int batch, Rng& rng) const;

 private:
  std::vector<Transition> data_;
  int capacity_ = 0;
  int next_ = 0;
};

// Gaussian policy head over all robots: the trunk output is split into
// per-robot means followed by per-robot log standard deviations.
struct PolicyNet {
  nn::Mlp net;
  int n_robots = 0;
};

struct CriticNet {
  nn::Mlp net;  // input: state ++ action, output: soft Q-value
};

struct ActionSample {
  std::vector<double> action;  // tanh-squashed, strictly inside (-1, 1)
  double log_prob = 0.0;
};

// tanh-squashed Gaussian sample for given noise, with the change-of-variables
// log-density correction sum_i log(1 - a_i^2 + eps).
ActionSample squashed_gaussian(const std::vector<double>& mean,
                               const std::vector<double>& log_std_raw,
                               const std::vector<double>& noise,
                               const SacConfig& cfg);

ActionSample sample_action(const PolicyNet& policy,
                           const std::vector<double>& state, Rng& rng,
                           const SacConfig& cfg);

// Evaluation-time action: tanh of the mean, no sampling.
std::vector<double> deterministic_action(const PolicyNet& policy,
                                         const std::vector<double>& state);

// Maps squashed actions in [-1, 1] to integer horizons in {1, ..., n_max}
// by scaling to [1, n_max] and taking the ceiling.
std::vector<int> action_to_horizons(const std::vector<double>& action,
                                    int n_max = kMaxHorizon);

struct RewardConfig {
  double lambda_h = 0.001;
  double e_bar = 0.1;
};

struct RewardTerms {
  double progress = 0.0;          // sum_i R_p
  double horizon_cost = 0.0;      // sum_i R_h
  double collision_cost = 0.0;    // sum_i R_c
  double terminal_bonus = 0.0;    // sum_i R_term
  double horizon_variance = 0.0;  // R_v
  double total = 0.0;
};

RewardTerms compute_reward_terms(const std::vector<Vec2>& prev_positions,
                                 const std::vector<Vec2>& positions,
                                 const std::vector<Vec2>& goals,
                                 const std::vector<int>& horizons,
                                 const std::vector<bool>& collided, int step,
                                 int max_steps,
                                 const std::vector<bool>& arrived_first,
                                 const RewardConfig& cfg);

double compute_reward(const std::vector<Vec2>& prev_positions,
                      const std::vector<Vec2>& positions,
                      const std::vector<Vec2>& goals,
                      const std::vector<int>& horizons,
                      const std::vector<bool>& collided, int step,
                      int max_steps, const std::vector<bool>& arrived_first,
                      const RewardConfig& cfg);

struct Agent {
  SacConfig cfg;
  int n_robots = 0;
  PolicyNet policy;
  CriticNet q1, q2, q1_target, q2_target;
  nn::AdamState policy_opt, q1_opt, q2_opt;
  double log_alpha = 0.0;
  nn::AdamScalar alpha_opt;
  ReplayBuffer buffer{1};
  Rng action_rng;
  Rng buffer_rng;
  std::uint64_t env_steps = 0;
  std::uint64_t update_count = 0;
  std::uint64_t trained_episodes = 0;

  double alpha() const;
  int state_dim() const { return 2 * n_robots; }
};

Agent make_agent(int n_robots, const SacConfig& cfg, std::uint64_t seed);

struct LossReport {
  bool updated = false;
  double q1_loss = 0.0;
  double q2_loss = 0.0;
  double actor_loss = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
  double mean_log_prob = 0.0;
};

// One gradient step on critics, actor and temperature from a buffer sample,
// followed by the target soft update. No-op (with a warning flag) while the
// buffer holds fewer than batch_size transitions.
LossReport update(Agent& agent);
LossReport update_with_batch(Agent& agent, std::span<const Transition> batch);

// Actor objective mean_b [alpha * log pi(a|s) - min(Q1, Q2)(s, a)] on a
// frozen batch and noise matrix, with critics held fixed. Used by the update
// step and directly comparable against finite differences over the policy
// parameters. mean_log_prob is filled when non-null.
double actor_objective(const Agent& agent, const nn::Mat& states,
                       const nn::Mat& noise, nn::Gradients* grads,
                       double* mean_log_prob = nullptr);

struct EpisodeLogRow {
  int episode = 0;
  double episode_return = 0.0;
  double path_cost = 0.0;
  int collisions = 0;
  int steps = 0;
  double mean_horizon = 0.0;
};

struct TrainResult {
  std::vector<EpisodeLogRow> log;
};

// Online training: one stochastic action per env step, immediate reward,
// gradient updates after warmup.
TrainResult train(Agent& agent, const Scenario& scenario, int episodes);

// Deterministic-policy horizon source for episode runs.
class PolicySelector final : public HorizonSelector {
 public:
  PolicySelector(const Agent& agent, int n_max);
  std::vector<int> select(const VecX& joint_positions) override;

 private:
  const Agent& agent_;
  int n_max_;
};

// Bundled checkpoint: manifest (robot count, config, episode count, config
// hash), the five networks in the versioned binary format, and the three
// optimizer states plus the temperature state. Round-trips bit-exactly.
void save_agent(std::ostream& out, const Agent& agent);
Agent load_agent(std::istream& in);
void save_agent_file(const std::string& path, const Agent& agent);
Agent load_agent_file(const std::string& path);

std::uint64_t config_hash(const SacConfig& cfg, int n_robots);

}  // namespace vhmpc::sac

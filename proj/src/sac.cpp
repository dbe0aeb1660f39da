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

#include "vhmpc/sac.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vhmpc::sac {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

double clamp(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

// tanh kept strictly inside (-1, 1): the floating-point tanh saturates to
// exactly +/-1 for |x| > ~19, which would break the open-range contract and
// zero the log-density correction.
double squash_tanh(double x) {
  double t = std::tanh(x);
  if (t >= 1.0) return std::nextafter(1.0, 0.0);
  if (t <= -1.0) return std::nextafter(-1.0, 0.0);
  return t;
}

}  // namespace

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  require(capacity >= 1, "replay buffer: capacity must be positive");
  data_.reserve(static_cast<size_t>(std::min(capacity, 1 << 20)));
}

void ReplayBuffer::push(Transition t) {
  if (size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[static_cast<size_t>(next_)] = std::move(t);
    next_ = (next_ + 1) % capacity_;
  }
}

std::vector<int> ReplayBuffer::sample_indices(int batch, Rng& rng) const {
  require(size() >= batch, "replay buffer: not enough transitions to sample");
  std::vector<int> idx(static_cast<size_t>(batch));
  for (int i = 0; i < batch; ++i) idx[static_cast<size_t>(i)] = rng.uniform_int(size());
  return idx;
}

ActionSample squashed_gaussian(const std::vector<double>& mean,
                               const std::vector<double>& log_std_raw,
                               const std::vector<double>& noise,
                               const SacConfig& cfg) {
  require(mean.size() == log_std_raw.size() && mean.size() == noise.size(),
          "squashed_gaussian: size mismatch");
  ActionSample out;
  out.action.resize(mean.size());
  double logp = 0.0;
  for (size_t i = 0; i < mean.size(); ++i) {
    const double ls = clamp(log_std_raw[i], cfg.log_std_min, cfg.log_std_max);
    const double sigma = std::exp(ls);
    const double z = noise[i];
    const double t = squash_tanh(mean[i] + sigma * z);
    out.action[i] = t;
    logp += -ls - kLogSqrt2Pi - 0.5 * z * z - std::log(1.0 - t * t + cfg.eps_tanh);
  }
  out.log_prob = logp;
  return out;
}

ActionSample sample_action(const PolicyNet& policy,
                           const std::vector<double>& state, Rng& rng,
                           const SacConfig& cfg) {
  const int n = policy.n_robots;
  const std::vector<double> heads = nn::forward(policy.net, state);
  require(static_cast<int>(heads.size()) == 2 * n, "sample_action: bad policy head");
  std::vector<double> mean(heads.begin(), heads.begin() + n);
  std::vector<double> log_std(heads.begin() + n, heads.end());
  std::vector<double> noise(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) noise[static_cast<size_t>(i)] = rng.normal();
  return squashed_gaussian(mean, log_std, noise, cfg);
}

std::vector<double> deterministic_action(const PolicyNet& policy,
                                         const std::vector<double>& state) {
  const int n = policy.n_robots;
  const std::vector<double> heads = nn::forward(policy.net, state);
  std::vector<double> a(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) a[static_cast<size_t>(i)] = squash_tanh(heads[static_cast<size_t>(i)]);
  return a;
}

std::vector<int> action_to_horizons(const std::vector<double>& action, int n_max) {
  std::vector<int> horizons(action.size());
  for (size_t i = 0; i < action.size(); ++i) {
    const double scaled = 1.0 + 0.5 * (action[i] + 1.0) * (n_max - 1);
    int h = static_cast<int>(std::ceil(scaled));
    horizons[i] = std::clamp(h, 1, n_max);
  }
  return horizons;
}

RewardTerms compute_reward_terms(const std::vector<Vec2>& prev_positions,
                                 const std::vector<Vec2>& positions,
                                 const std::vector<Vec2>& goals,
                                 const std::vector<int>& horizons,
                                 const std::vector<bool>& collided, int step,
                                 int max_steps,
                                 const std::vector<bool>& arrived_first,
                                 const RewardConfig& cfg) {
  const size_t n = positions.size();
  require(prev_positions.size() == n && goals.size() == n &&
              horizons.size() == n && collided.size() == n &&
              arrived_first.size() == n,
          "compute_reward: inconsistent lengths");
  RewardTerms t;
  double h_mean = 0.0;
  for (size_t i = 0; i < n; ++i) h_mean += horizons[i];
  h_mean /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    const double e_prev = (goals[i] - prev_positions[i]).norm();
    const double e_now = (goals[i] - positions[i]).norm();
    const double de = e_prev - e_now;
    t.progress += de >= 0.0 ? 25.0 + 250.0 * de : 250.0 * de;
    t.horizon_cost += cfg.lambda_h * horizons[i];
    if (collided[i]) t.collision_cost += 100.0 + (max_steps - step);
    if (arrived_first[i]) t.terminal_bonus += 150.0;
    const double dh = horizons[i] - h_mean;
    t.horizon_variance += dh * dh;
  }
  t.horizon_variance /= static_cast<double>(n);  // population variance
  t.total = t.progress - t.horizon_cost - t.collision_cost + t.terminal_bonus -
            t.horizon_variance;
  return t;
}

double compute_reward(const std::vector<Vec2>& prev_positions,
                      const std::vector<Vec2>& positions,
                      const std::vector<Vec2>& goals,
                      const std::vector<int>& horizons,
                      const std::vector<bool>& collided, int step,
                      int max_steps, const std::vector<bool>& arrived_first,
                      const RewardConfig& cfg) {
  return compute_reward_terms(prev_positions, positions, goals, horizons,
                              collided, step, max_steps, arrived_first, cfg)
      .total;
}

double Agent::alpha() const { return std::exp(log_alpha); }

Agent make_agent(int n_robots, const SacConfig& cfg_in, std::uint64_t seed) {
  require(n_robots >= 1, "make_agent: need at least one robot");
  Agent agent;
  agent.cfg = cfg_in;
  if (agent.cfg.target_entropy == 0.0) agent.cfg.target_entropy = -n_robots;
  agent.n_robots = n_robots;

  Rng master(seed);
  Rng init_rng = master.fork(1);
  const int s = 2 * n_robots;
  const int w = agent.cfg.hidden_width;
  // Small final policy layer keeps initial actions near zero (mid-range
  // horizons) which stabilizes the early episodes.
  agent.policy.net = nn::make_mlp({s, w, w, 2 * n_robots}, init_rng, 1e-2);
  agent.policy.n_robots = n_robots;
  agent.q1.net = nn::make_mlp({s + n_robots, w, w, 1}, init_rng);
  agent.q2.net = nn::make_mlp({s + n_robots, w, w, 1}, init_rng);
  agent.q1_target = agent.q1;
  agent.q2_target = agent.q2;

  agent.policy_opt = nn::make_adam(agent.policy.net, agent.cfg.lr);
  agent.q1_opt = nn::make_adam(agent.q1.net, agent.cfg.lr);
  agent.q2_opt = nn::make_adam(agent.q2.net, agent.cfg.lr);
  agent.log_alpha = agent.cfg.initial_log_alpha;
  agent.alpha_opt.lr = agent.cfg.lr;

  agent.buffer = ReplayBuffer(agent.cfg.buffer_capacity);
  agent.action_rng = master.fork(10);
  agent.buffer_rng = master.fork(11);
  return agent;
}

namespace {

struct BatchViews {
  nn::Mat states, actions, next_states;
  std::vector<double> rewards, done;
};

BatchViews gather(std::span<const Transition> batch, int state_dim, int n_act) {
  const int b = static_cast<int>(batch.size());
  BatchViews v{nn::Mat(b, state_dim), nn::Mat(b, n_act), nn::Mat(b, state_dim),
               std::vector<double>(static_cast<size_t>(b)),
               std::vector<double>(static_cast<size_t>(b))};
  for (int i = 0; i < b; ++i) {
    const Transition& t = batch[static_cast<size_t>(i)];
    require(static_cast<int>(t.state.size()) == state_dim &&
                static_cast<int>(t.next_state.size()) == state_dim &&
                static_cast<int>(t.action.size()) == n_act,
            "update: transition shape mismatch");
    std::copy(t.state.begin(), t.state.end(), v.states.row_ptr(i));
    std::copy(t.action.begin(), t.action.end(), v.actions.row_ptr(i));
    std::copy(t.next_state.begin(), t.next_state.end(), v.next_states.row_ptr(i));
    v.rewards[static_cast<size_t>(i)] = t.reward;
    v.done[static_cast<size_t>(i)] = t.done ? 1.0 : 0.0;
  }
  return v;
}

nn::Mat concat_cols(const nn::Mat& a, const nn::Mat& b) {
  nn::Mat out(a.rows, a.cols + b.cols);
  for (int r = 0; r < a.rows; ++r) {
    std::copy(a.row_ptr(r), a.row_ptr(r) + a.cols, out.row_ptr(r));
    std::copy(b.row_ptr(r), b.row_ptr(r) + b.cols, out.row_ptr(r) + a.cols);
  }
  return out;
}

void soft_update(nn::Mlp& target, const nn::Mlp& online, double tau) {
  for (int l = 0; l < target.layer_count(); ++l) {
    double* t = target.weights[l].d.data();
    const double* o = online.weights[l].d.data();
    for (size_t i = 0; i < target.weights[l].size(); ++i)
      t[i] = tau * o[i] + (1.0 - tau) * t[i];
    double* tb = target.biases[l].data();
    const double* ob = online.biases[l].data();
    for (size_t i = 0; i < target.biases[l].size(); ++i)
      tb[i] = tau * ob[i] + (1.0 - tau) * tb[i];
  }
}

}  // namespace

double actor_objective(const Agent& agent, const nn::Mat& states,
                       const nn::Mat& noise, nn::Gradients* grads,
                       double* mean_log_prob) {
  const int b = states.rows;
  const int n = agent.n_robots;
  require(noise.rows == b && noise.cols == n, "actor_objective: bad noise shape");
  const double alpha = agent.alpha();
  const SacConfig& cfg = agent.cfg;

  nn::ForwardCache cache_pi;
  const nn::Mat heads = nn::forward(agent.policy.net, states, &cache_pi);

  nn::Mat actions(b, n);
  nn::Mat sigma(b, n);
  nn::Mat ls_mask(b, n);
  std::vector<double> logp(static_cast<size_t>(b), 0.0);
  for (int r = 0; r < b; ++r) {
    for (int i = 0; i < n; ++i) {
      const double raw = heads(r, n + i);
      const bool inside = raw > cfg.log_std_min && raw < cfg.log_std_max;
      const double ls = clamp(raw, cfg.log_std_min, cfg.log_std_max);
      const double sig = std::exp(ls);
      const double z = noise(r, i);
      const double t = squash_tanh(heads(r, i) + sig * z);
      actions(r, i) = t;
      sigma(r, i) = sig;
      ls_mask(r, i) = inside ? 1.0 : 0.0;
      logp[static_cast<size_t>(r)] += -ls - kLogSqrt2Pi - 0.5 * z * z -
                                      std::log(1.0 - t * t + cfg.eps_tanh);
    }
  }

  const nn::Mat sa = concat_cols(states, actions);
  nn::ForwardCache cache_q1, cache_q2;
  const nn::Mat q1v = nn::forward(agent.q1.net, sa, &cache_q1);
  const nn::Mat q2v = nn::forward(agent.q2.net, sa, &cache_q2);

  double loss = 0.0;
  double logp_mean = 0.0;
  for (int r = 0; r < b; ++r) {
    loss += alpha * logp[static_cast<size_t>(r)] - std::min(q1v(r, 0), q2v(r, 0));
    logp_mean += logp[static_cast<size_t>(r)];
  }
  loss /= b;
  logp_mean /= b;
  if (mean_log_prob) *mean_log_prob = logp_mean;
  if (!grads) return loss;

  // dL/dQmin = -1/B through the argmin critic per batch item (ties -> Q1).
  nn::Mat g1(b, 1), g2(b, 1);
  for (int r = 0; r < b; ++r) {
    if (q1v(r, 0) <= q2v(r, 0)) {
      g1(r, 0) = -1.0 / b;
    } else {
      g2(r, 0) = -1.0 / b;
    }
  }
  const nn::Mat din1 = nn::backward_input_only(agent.q1.net, cache_q1, g1);
  const nn::Mat din2 = nn::backward_input_only(agent.q2.net, cache_q2, g2);

  const int state_dim = states.cols;
  nn::Mat head_grad(b, 2 * n);
  for (int r = 0; r < b; ++r) {
    for (int i = 0; i < n; ++i) {
      const double t = actions(r, i);
      const double one_m_t2 = 1.0 - t * t;
      const double dq_da = din1(r, state_dim + i) + din2(r, state_dim + i);
      const double dlogp_dxi = 2.0 * t * one_m_t2 / (one_m_t2 + cfg.eps_tanh);
      // total gradient w.r.t. the pre-squash sample xi = mu + sigma * z
      const double g_xi = (alpha / b) * dlogp_dxi + dq_da * one_m_t2;
      head_grad(r, i) = g_xi;
      head_grad(r, n + i) =
          (g_xi * sigma(r, i) * noise(r, i) - alpha / b) * ls_mask(r, i);
    }
  }
  nn::backward(agent.policy.net, cache_pi, head_grad, *grads);
  return loss;
}

LossReport update_with_batch(Agent& agent, std::span<const Transition> batch) {
  const int b = static_cast<int>(batch.size());
  require(b >= 1, "update: empty batch");
  const int n = agent.n_robots;
  const int s = agent.state_dim();
  const SacConfig& cfg = agent.cfg;
  BatchViews v = gather(batch, s, n);

  LossReport report;
  report.updated = true;

  // Fresh next-state actions from the current policy (noise drawn first,
  // row-major, so the stream is independent of thread count).
  nn::Mat z2(b, n);
  for (double& x : z2.d) x = agent.action_rng.normal();
  const nn::Mat heads2 = nn::forward(agent.policy.net, v.next_states);
  nn::Mat a2(b, n);
  std::vector<double> logp2(static_cast<size_t>(b), 0.0);
  for (int r = 0; r < b; ++r) {
    for (int i = 0; i < n; ++i) {
      const double ls = clamp(heads2(r, n + i), cfg.log_std_min, cfg.log_std_max);
      const double sig = std::exp(ls);
      const double z = z2(r, i);
      const double t = squash_tanh(heads2(r, i) + sig * z);
      a2(r, i) = t;
      logp2[static_cast<size_t>(r)] += -ls - kLogSqrt2Pi - 0.5 * z * z -
                                       std::log(1.0 - t * t + cfg.eps_tanh);
    }
  }
  const nn::Mat sa2 = concat_cols(v.next_states, a2);
  const nn::Mat q1t = nn::forward(agent.q1_target.net, sa2);
  const nn::Mat q2t = nn::forward(agent.q2_target.net, sa2);
  const double alpha = agent.alpha();
  std::vector<double> target(static_cast<size_t>(b));
  for (int r = 0; r < b; ++r) {
    const double soft_q = std::min(q1t(r, 0), q2t(r, 0)) -
                          alpha * logp2[static_cast<size_t>(r)];
    target[static_cast<size_t>(r)] =
        v.rewards[static_cast<size_t>(r)] +
        cfg.gamma * (1.0 - v.done[static_cast<size_t>(r)]) * soft_q;
  }

  // Critic regression toward the soft target.
  const nn::Mat sa = concat_cols(v.states, v.actions);
  auto critic_step = [&](CriticNet& critic, nn::AdamState& opt) {
    nn::ForwardCache cache;
    const nn::Mat q = nn::forward(critic.net, sa, &cache);
    nn::Mat dq(b, 1);
    double loss = 0.0;
    for (int r = 0; r < b; ++r) {
      const double err = q(r, 0) - target[static_cast<size_t>(r)];
      loss += err * err;
      dq(r, 0) = 2.0 * err / b;
    }
    loss /= b;
    nn::Gradients grads = nn::zero_gradients(critic.net);
    nn::backward(critic.net, cache, dq, grads);
    nn::adam_step(critic.net, grads, opt);
    return loss;
  };
  report.q1_loss = critic_step(agent.q1, agent.q1_opt);
  report.q2_loss = critic_step(agent.q2, agent.q2_opt);

  // Actor step on fresh noise.
  nn::Mat z(b, n);
  for (double& x : z.d) x = agent.action_rng.normal();
  nn::Gradients pi_grads = nn::zero_gradients(agent.policy.net);
  double mean_logp = 0.0;
  report.actor_loss = actor_objective(agent, v.states, z, &pi_grads, &mean_logp);
  nn::adam_step(agent.policy.net, pi_grads, agent.policy_opt);
  report.mean_log_prob = mean_logp;

  // Temperature: minimize -alpha * (log pi + target entropy).
  const double alpha_grad = -(mean_logp + cfg.target_entropy) * agent.alpha();
  report.alpha_loss = -agent.alpha() * (mean_logp + cfg.target_entropy);
  nn::adam_step_scalar(agent.log_alpha, alpha_grad, agent.alpha_opt);
  report.alpha = agent.alpha();

  soft_update(agent.q1_target.net, agent.q1.net, cfg.tau);
  soft_update(agent.q2_target.net, agent.q2.net, cfg.tau);
  agent.update_count += 1;
  return report;
}

LossReport update(Agent& agent) {
  if (agent.buffer.size() < agent.cfg.batch_size) {
    return {};  // not enough data yet
  }
  const std::vector<int> idx =
      agent.buffer.sample_indices(agent.cfg.batch_size, agent.buffer_rng);
  std::vector<Transition> batch;
  batch.reserve(idx.size());
  for (int i : idx) batch.push_back(agent.buffer.at(i));
  return update_with_batch(agent, batch);
}

TrainResult train(Agent& agent, const Scenario& scenario, int episodes) {
  require(static_cast<int>(scenario.robots.size()) == agent.n_robots,
          "train: scenario robot count does not match the agent");
  Scenario sc = scenario;
  sc.terminate_on_collision = agent.cfg.terminate_on_collision;
  std::vector<Vec2> goals;
  for (const auto& r : sc.robots) goals.push_back(r.goal);
  const RewardConfig reward_cfg{sc.params.lambda_h, sc.params.e_bar};

  TrainResult result;
  for (int ep = 0; ep < episodes; ++ep) {
    EpisodeRunner runner(sc);
    double ep_return = 0.0;
    long horizon_sum = 0;
    long horizon_count = 0;
    int collisions = 0;
    while (!runner.finished()) {
      const VecX s_vec = runner.joint_positions();
      const std::vector<double> s(s_vec.data(), s_vec.data() + s_vec.size());
      const ActionSample a = sample_action(agent.policy, s, agent.action_rng, agent.cfg);
      const std::vector<int> horizons = action_to_horizons(a.action, sc.params.n_max);
      const StepOutcome out = runner.step(horizons);
      const double reward = compute_reward(
          out.positions_before, out.positions_after, goals, horizons,
          out.collided, out.step_index, sc.params.max_steps, out.arrived_first,
          reward_cfg);
      ep_return += reward;
      for (int h : horizons) horizon_sum += h;
      horizon_count += static_cast<long>(horizons.size());
      for (bool c : out.collided) collisions += c ? 1 : 0;

      const VecX s2_vec = runner.joint_positions();
      Transition t;
      t.state = s;
      t.action = a.action;
      t.reward = reward;
      t.next_state.assign(s2_vec.data(), s2_vec.data() + s2_vec.size());
      // A timeout cut is not a real terminal state; let the bootstrap
      // continue through it.
      t.done = out.finished && out.termination != Termination::kTimeout;
      agent.buffer.push(std::move(t));
      agent.env_steps += 1;

      if (agent.env_steps >= static_cast<std::uint64_t>(agent.cfg.warmup_steps)) {
        for (int u = 0; u < agent.cfg.updates_per_step; ++u) update(agent);
      }
    }
    const EpisodeResult er = runner.result();
    EpisodeLogRow row;
    row.episode = ep;
    row.episode_return = ep_return;
    row.path_cost = er.metrics.path_cost;
    row.collisions = collisions;
    row.steps = er.steps;
    row.mean_horizon = horizon_count > 0
                           ? static_cast<double>(horizon_sum) / horizon_count
                           : 0.0;
    result.log.push_back(row);
    agent.trained_episodes += 1;
  }
  return result;
}

PolicySelector::PolicySelector(const Agent& agent, int n_max)
    : agent_(agent), n_max_(n_max) {}

std::vector<int> PolicySelector::select(const VecX& joint_positions) {
  require(joint_positions.size() == agent_.state_dim(),
          "policy selector: state dimension mismatch");
  const std::vector<double> s(joint_positions.data(),
                              joint_positions.data() + joint_positions.size());
  return action_to_horizons(deterministic_action(agent_.policy, s), n_max_);
}

namespace {

constexpr char kAgentMagic[8] = {'V', 'H', 'M', 'P', 'C', '-', 'C', 'P'};
constexpr std::uint32_t kAgentVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("agent checkpoint: truncated");
  return v;
}
std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("agent checkpoint: truncated");
  return v;
}
double get_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("agent checkpoint: truncated");
  return v;
}

void put_config(std::ostream& out, const SacConfig& c) {
  put_f64(out, c.gamma);
  put_f64(out, c.tau);
  put_f64(out, c.lr);
  put_u32(out, static_cast<std::uint32_t>(c.batch_size));
  put_u32(out, static_cast<std::uint32_t>(c.buffer_capacity));
  put_u32(out, static_cast<std::uint32_t>(c.warmup_steps));
  put_u32(out, static_cast<std::uint32_t>(c.updates_per_step));
  put_u32(out, static_cast<std::uint32_t>(c.hidden_width));
  put_f64(out, c.target_entropy);
  put_f64(out, c.initial_log_alpha);
  put_f64(out, c.eps_tanh);
  put_f64(out, c.log_std_min);
  put_f64(out, c.log_std_max);
  put_u32(out, c.terminate_on_collision ? 1 : 0);
}

SacConfig get_config(std::istream& in) {
  SacConfig c;
  c.gamma = get_f64(in);
  c.tau = get_f64(in);
  c.lr = get_f64(in);
  c.batch_size = static_cast<int>(get_u32(in));
  c.buffer_capacity = static_cast<int>(get_u32(in));
  c.warmup_steps = static_cast<int>(get_u32(in));
  c.updates_per_step = static_cast<int>(get_u32(in));
  c.hidden_width = static_cast<int>(get_u32(in));
  c.target_entropy = get_f64(in);
  c.initial_log_alpha = get_f64(in);
  c.eps_tanh = get_f64(in);
  c.log_std_min = get_f64(in);
  c.log_std_max = get_f64(in);
  c.terminate_on_collision = get_u32(in) != 0;
  return c;
}

}  // namespace

std::uint64_t config_hash(const SacConfig& cfg, int n_robots) {
  // FNV-1a over the serialized config bytes plus the robot count.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  auto mix_f64 = [&](double v) { mix(&v, sizeof v); };
  auto mix_i = [&](int v) { mix(&v, sizeof v); };
  mix_i(n_robots);
  mix_f64(cfg.gamma);
  mix_f64(cfg.tau);
  mix_f64(cfg.lr);
  mix_i(cfg.batch_size);
  mix_i(cfg.buffer_capacity);
  mix_i(cfg.warmup_steps);
  mix_i(cfg.updates_per_step);
  mix_i(cfg.hidden_width);
  mix_f64(cfg.target_entropy);
  mix_f64(cfg.initial_log_alpha);
  mix_f64(cfg.eps_tanh);
  mix_f64(cfg.log_std_min);
  mix_f64(cfg.log_std_max);
  mix_i(cfg.terminate_on_collision ? 1 : 0);
  return h;
}

void save_agent(std::ostream& out, const Agent& agent) {
  out.write(kAgentMagic, sizeof kAgentMagic);
  put_u32(out, kAgentVersion);
  put_u32(out, static_cast<std::uint32_t>(agent.n_robots));
  put_u64(out, agent.trained_episodes);
  put_u64(out, agent.env_steps);
  put_u64(out, agent.update_count);
  put_u64(out, config_hash(agent.cfg, agent.n_robots));
  put_config(out, agent.cfg);
  put_f64(out, agent.log_alpha);
  put_u64(out, agent.alpha_opt.step);
  put_f64(out, agent.alpha_opt.m);
  put_f64(out, agent.alpha_opt.v);
  nn::save_mlp(out, agent.policy.net);
  nn::save_mlp(out, agent.q1.net);
  nn::save_mlp(out, agent.q2.net);
  nn::save_mlp(out, agent.q1_target.net);
  nn::save_mlp(out, agent.q2_target.net);
  nn::save_adam(out, agent.policy_opt);
  nn::save_adam(out, agent.q1_opt);
  nn::save_adam(out, agent.q2_opt);
}

Agent load_agent(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kAgentMagic, sizeof magic) != 0)
    throw std::runtime_error("agent checkpoint: bad magic");
  if (get_u32(in) != kAgentVersion)
    throw std::runtime_error("agent checkpoint: unsupported version");
  Agent agent;
  agent.n_robots = static_cast<int>(get_u32(in));
  agent.trained_episodes = get_u64(in);
  agent.env_steps = get_u64(in);
  agent.update_count = get_u64(in);
  const std::uint64_t stored_hash = get_u64(in);
  agent.cfg = get_config(in);
  if (stored_hash != config_hash(agent.cfg, agent.n_robots))
    throw std::runtime_error("agent checkpoint: config hash mismatch");
  agent.log_alpha = get_f64(in);
  agent.alpha_opt.lr = agent.cfg.lr;
  agent.alpha_opt.step = get_u64(in);
  agent.alpha_opt.m = get_f64(in);
  agent.alpha_opt.v = get_f64(in);
  agent.policy.net = nn::load_mlp(in);
  agent.policy.n_robots = agent.n_robots;
  agent.q1.net = nn::load_mlp(in);
  agent.q2.net = nn::load_mlp(in);
  agent.q1_target.net = nn::load_mlp(in);
  agent.q2_target.net = nn::load_mlp(in);
  agent.policy_opt = nn::load_adam(in);
  agent.q1_opt = nn::load_adam(in);
  agent.q2_opt = nn::load_adam(in);
  if (agent.policy.net.input_dim() != agent.state_dim())
    throw std::runtime_error("agent checkpoint: inconsistent shapes");
  agent.buffer = ReplayBuffer(agent.cfg.buffer_capacity);
  return agent;
}

void save_agent_file(const std::string& path, const Agent& agent) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("agent checkpoint: cannot open " + path);
  save_agent(out, agent);
}

Agent load_agent_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("agent checkpoint: cannot open " + path);
  return load_agent(in);
}

}  // namespace vhmpc::sac

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

#include "vhmpc/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vhmpc::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

Vec2 parse_vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument(std::string("scenario: ") + what +
                                " must be a [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: malformed JSON: ") + e.what());
  }
  Scenario sc;
  if (!j.contains("robots") || !j["robots"].is_array() || j["robots"].empty())
    throw std::invalid_argument("scenario: needs a non-empty robots array");
  for (const auto& r : j["robots"]) {
    ScenarioRobot robot;
    robot.start = parse_vec2(r.at("start"), "robot start");
    robot.goal = parse_vec2(r.at("goal"), "robot goal");
    sc.robots.push_back(robot);
  }
  if (j.contains("obstacles")) {
    for (const auto& o : j["obstacles"]) {
      sc.obstacles.push_back({parse_vec2(o.at("center"), "obstacle center")});
    }
  }
  if (j.contains("params")) {
    const json& p = j["params"];
    auto get = [&p](const char* key, double fallback) {
      return p.contains(key) ? p.at(key).get<double>() : fallback;
    };
    sc.params.h = get("h", sc.params.h);
    sc.params.q = get("q", sc.params.q);
    sc.params.w = get("w", sc.params.w);
    sc.params.r_min = get("r_min", sc.params.r_min);
    sc.params.ub = get("ub", sc.params.ub);
    sc.params.lb = get("lb", sc.params.lb);
    sc.params.lambda_h = get("lambda_h", sc.params.lambda_h);
    sc.params.e_bar = get("e_bar", sc.params.e_bar);
    if (p.contains("K")) sc.params.max_steps = p.at("K").get<int>();
    if (p.contains("N_max")) sc.params.n_max = p.at("N_max").get<int>();
  }
  if (j.contains("horizon_mode")) {
    const json& m = j["horizon_mode"];
    if (m.contains("fixed")) {
      sc.mode = HorizonMode::kFixed;
      sc.fixed_horizon = m.at("fixed").get<int>();
    } else if (m.contains("policy")) {
      sc.mode = HorizonMode::kPolicy;
      sc.policy_checkpoint = m.at("policy").get<std::string>();
    } else {
      throw std::invalid_argument("scenario: horizon_mode needs 'fixed' or 'policy'");
    }
  }
  if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("terminate_on_collision"))
    sc.terminate_on_collision = j.at("terminate_on_collision").get<bool>();
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scenario: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["robots"] = json::array();
  for (const auto& r : sc.robots) {
    j["robots"].push_back({{"start", {r.start.x(), r.start.y()}},
                           {"goal", {r.goal.x(), r.goal.y()}}});
  }
  j["obstacles"] = json::array();
  for (const auto& o : sc.obstacles) {
    j["obstacles"].push_back({{"center", {o.center.x(), o.center.y()}}});
  }
  j["params"] = {{"h", sc.params.h},       {"q", sc.params.q},
                 {"w", sc.params.w},       {"r_min", sc.params.r_min},
                 {"ub", sc.params.ub},     {"lb", sc.params.lb},
                 {"K", sc.params.max_steps},
                 {"lambda_h", sc.params.lambda_h},
                 {"e_bar", sc.params.e_bar},
                 {"N_max", sc.params.n_max}};
  if (sc.mode == HorizonMode::kFixed) {
    j["horizon_mode"] = {{"fixed", sc.fixed_horizon}};
  } else {
    j["horizon_mode"] = {{"policy", sc.policy_checkpoint}};
  }
  j["seed"] = sc.seed;
  j["terminate_on_collision"] = sc.terminate_on_collision;
  return j.dump(2) + "\n";
}

std::string trajectory_csv(const EpisodeResult& result) {
  std::string out = "step,robot_id,x,y,ux,uy,horizon,active_constraints\n";
  for (const auto& r : result.records) {
    out += std::to_string(r.step);
    out += ',';
    out += std::to_string(r.robot);
    out += ',';
    out += format_double(r.position.x());
    out += ',';
    out += format_double(r.position.y());
    out += ',';
    out += format_double(r.input.x());
    out += ',';
    out += format_double(r.input.y());
    out += ',';
    out += std::to_string(r.horizon);
    out += ',';
    out += std::to_string(r.active_constraints);
    out += '\n';
  }
  return out;
}

std::string metrics_json(const EpisodeResult& result) {
  json j;
  j["path_cost"] = result.metrics.path_cost;
  j["constraint_activations"] = result.metrics.constraint_activations;
  j["completion_time"] = result.metrics.completion_time;
  if (std::isfinite(result.metrics.min_pairwise_distance)) {
    j["min_pairwise_distance"] = result.metrics.min_pairwise_distance;
  } else {
    j["min_pairwise_distance"] = nullptr;
  }
  j["steps"] = result.steps;
  j["termination"] = termination_name(result.termination);
  j["qp_fallbacks"] = result.qp_fallbacks;
  return j.dump(2) + "\n";
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out =
      "label,horizon,path_cost,constraint_activations,completion_time_s,steps,"
      "completed,termination\n";
  for (const auto& r : rows) {
    out += r.label;
    out += ',';
    out += std::to_string(r.horizon);
    out += ',';
    out += format_double(r.path_cost);
    out += ',';
    out += std::to_string(r.activations);
    out += ',';
    out += format_double(r.completion_time);
    out += ',';
    out += std::to_string(r.steps);
    out += ',';
    out += r.completed ? "1" : "0";
    out += ',';
    out += termination_name(r.termination);
    out += '\n';
  }
  return out;
}

std::string training_log_csv(const std::vector<sac::EpisodeLogRow>& log) {
  std::string out = "episode,return,path_cost,collisions,steps,mean_horizon\n";
  for (const auto& r : log) {
    out += std::to_string(r.episode);
    out += ',';
    out += format_double(r.episode_return);
    out += ',';
    out += format_double(r.path_cost);
    out += ',';
    out += std::to_string(r.collisions);
    out += ',';
    out += std::to_string(r.steps);
    out += ',';
    out += format_double(r.mean_horizon);
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
}

}  // namespace vhmpc::io

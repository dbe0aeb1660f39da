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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vhmpc/cli.hpp"
#include "vhmpc/scenario_io.hpp"
#include "vhmpc/sim.hpp"

using namespace vhmpc;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("vhmpc_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const char* name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(std::initializer_list<std::string> args) {
  std::vector<const char*> argv = {"vhmpc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run_command(static_cast<int>(argv.size()), argv.data());
}

constexpr const char* kTwoRobotJson = R"({
  "robots": [
    {"start": [12.5, 2.5], "goal": [12.5, 22.5]},
    {"start": [2.5, 12.5], "goal": [22.5, 12.5]}
  ],
  "obstacles": [],
  "params": {"h": 0.2, "q": 5, "w": 10, "r_min": 1.5, "ub": 1.5, "lb": -1.5,
             "K": 350, "lambda_h": 0.001, "e_bar": 0.1, "N_max": 49},
  "horizon_mode": {"fixed": 30},
  "seed": 7
})";

}  // namespace

TEST_CASE("scenario JSON parses all fields and applies defaults") {
  const Scenario sc = io::scenario_from_json(kTwoRobotJson);
  CHECK(sc.robots.size() == 2);
  CHECK(sc.robots[1].goal.isApprox(Vec2{22.5, 12.5}));
  CHECK(sc.params.max_steps == 350);
  CHECK(sc.mode == HorizonMode::kFixed);
  CHECK(sc.fixed_horizon == 30);
  CHECK(sc.seed == 7);
  CHECK(sc.terminate_on_collision);  // default

  const Scenario defaults = io::scenario_from_json(
      R"({"robots": [{"start": [0, 0], "goal": [1, 0]}]})");
  CHECK(defaults.params.h == 0.2);
  CHECK(defaults.params.r_min == 1.5);
  CHECK(defaults.params.n_max == 49);

  const Scenario policy = io::scenario_from_json(
      R"({"robots": [{"start": [0, 0], "goal": [1, 0]}],
          "horizon_mode": {"policy": "ckpt.bin"}})");
  CHECK(policy.mode == HorizonMode::kPolicy);
  CHECK(policy.policy_checkpoint == "ckpt.bin");
}

TEST_CASE("scenario JSON rejects malformed input") {
  CHECK_THROWS_AS(io::scenario_from_json("{ not json"), std::invalid_argument);
  CHECK_THROWS_AS(io::scenario_from_json("{}"), std::invalid_argument);
  CHECK_THROWS_AS(io::scenario_from_json(
                      R"({"robots": [{"start": [0], "goal": [1, 0]}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(io::scenario_from_json(
                      R"({"robots": [{"start": [0, 0], "goal": [1, 0]}],
                          "horizon_mode": {}})"),
                  std::invalid_argument);
}

TEST_CASE("scenario serialization round-trips") {
  const Scenario sc = io::scenario_from_json(kTwoRobotJson);
  const Scenario again = io::scenario_from_json(io::scenario_to_json(sc));
  CHECK(again.robots.size() == sc.robots.size());
  CHECK(again.fixed_horizon == sc.fixed_horizon);
  CHECK(again.params.e_bar == sc.params.e_bar);
  CHECK(again.seed == sc.seed);
}

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.2, -1.5, 1.0 / 3.0, 12.500000000000002, 0.0, 1e-17}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("trajectory CSV has one row per robot per step") {
  Scenario sc;
  sc.robots = {{{0, 0}, {2, 0}}, {{10, 10}, {12, 10}}};
  sc.fixed_horizon = 5;
  const EpisodeResult res = run_episode(sc);
  const std::string csv = io::trajectory_csv(res);
  const long rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == 1 + 2 * res.steps);  // header + robots * steps
  CHECK(csv.rfind("step,robot_id,x,y,ux,uy,horizon,active_constraints\n", 0) == 0);
}

TEST_CASE("cli run writes artifacts and reports success") {
  TempDir tmp;
  io::write_file(tmp.file("sc.json"), kTwoRobotJson);
  const std::string out = (tmp.path / "out").string();
  const int code = run_cli({"run", "--scenario", tmp.file("sc.json"), "--out", out});
  CHECK(code == 0);
  const std::string metrics = slurp(out + "/metrics.json");
  CHECK(metrics.find("\"termination\": \"all_arrived\"") != std::string::npos);
  CHECK(metrics.find("wall") == std::string::npos);
  CHECK(slurp(out + "/trajectory.csv").size() > 100);
}

TEST_CASE("cli exit codes: usage, config and task failures") {
  TempDir tmp;
  CHECK(run_cli({"run", "--scenario", tmp.file("missing.json"), "--out",
                 tmp.file("out")}) == 1);

  io::write_file(tmp.file("bad.json"), "{ nope");
  CHECK(run_cli({"run", "--scenario", tmp.file("bad.json"), "--out",
                 tmp.file("out")}) == 1);

  // collision: robot spawned inside an obstacle's safety disc
  io::write_file(tmp.file("collide.json"), R"({
    "robots": [{"start": [0.3, 0], "goal": [10, 0]}],
    "obstacles": [{"center": [0, 0]}],
    "horizon_mode": {"fixed": 20}
  })");
  const std::string out = tmp.file("out_collide");
  CHECK(run_cli({"run", "--scenario", tmp.file("collide.json"), "--out", out}) == 2);
  // metrics are still written on task failure
  CHECK(slurp(out + "/metrics.json").find("\"collision\"") != std::string::npos);

  // timeout: unreachable goal
  io::write_file(tmp.file("blocked.json"), R"({
    "robots": [{"start": [0, 0], "goal": [10, 0]}],
    "obstacles": [{"center": [10, 0]}],
    "params": {"K": 40},
    "horizon_mode": {"fixed": 10}
  })");
  CHECK(run_cli({"run", "--scenario", tmp.file("blocked.json"), "--out",
                 tmp.file("out_blocked")}) == 2);
}

TEST_CASE("cli rejects contradictory horizon sources") {
  TempDir tmp;
  io::write_file(tmp.file("sc.json"), kTwoRobotJson);
  CHECK(run_cli({"run", "--scenario", tmp.file("sc.json"), "--out",
                 tmp.file("out"), "--horizon", "10", "--checkpoint",
                 "x.bin"}) == 1);
}

TEST_CASE("cli compare writes one row per horizon") {
  TempDir tmp;
  io::write_file(tmp.file("sc.json"), kTwoRobotJson);
  const std::string out = tmp.file("out");
  CHECK(run_cli({"compare", "--scenario", tmp.file("sc.json"), "--out", out,
                 "--horizons", "10,20,30"}) == 0);
  const std::string csv = slurp(out + "/comparison.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find("fixed_20") != std::string::npos);
  CHECK(csv.find("wall") == std::string::npos);

  CHECK(run_cli({"compare", "--scenario", tmp.file("sc.json"), "--out", out,
                 "--horizons", "10", "--checkpoint",
                 tmp.file("no_such.bin")}) == 1);
}

TEST_CASE("cli train smoke: episodes=0 gives an initial checkpoint") {
  TempDir tmp;
  io::write_file(tmp.file("sc.json"), kTwoRobotJson);
  const std::string out = tmp.file("out");
  CHECK(run_cli({"train", "--scenario", tmp.file("sc.json"), "--out", out,
                 "--episodes", "0"}) == 0);
  const std::string log = slurp(out + "/training_log.csv");
  CHECK(log == "episode,return,path_cost,collisions,steps,mean_horizon\n");

  // the initial checkpoint is loadable and drives an eval run
  CHECK(run_cli({"eval", "--scenario", tmp.file("sc.json"), "--out",
                 tmp.file("out_eval"), "--checkpoint",
                 out + "/checkpoint.bin"}) != 1);
}

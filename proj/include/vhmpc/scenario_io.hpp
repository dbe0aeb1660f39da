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

#include <string>
#include <vector>

#include "vhmpc/sac.hpp"
#include "vhmpc/sim.hpp"

namespace vhmpc::io {

// Shortest round-trip decimal form; identical output for identical doubles.
std::string format_double(double v);

Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& scenario);

// step,robot_id,x,y,ux,uy,horizon,active_constraints
std::string trajectory_csv(const EpisodeResult& result);

// One JSON object per episode. Wall-clock time is deliberately absent so
// rerunning with the same seed reproduces the file byte for byte.
std::string metrics_json(const EpisodeResult& result);

// label,horizon,path_cost,constraint_activations,completion_time_s,steps,
// completed,termination
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

// episode,return,path_cost,collisions,steps,mean_horizon
std::string training_log_csv(const std::vector<sac::EpisodeLogRow>& log);

void write_file(const std::string& path, const std::string& contents);

}  // namespace vhmpc::io

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

#include <optional>
#include <span>
#include <vector>

#include "vhmpc/linalg.hpp"
#include "vhmpc/prediction.hpp"

namespace vhmpc {

// Robots and static obstacles are discs of radius r_min/2, so r_min is the
// smallest allowed center-to-center distance.
struct Obstacle {
  Vec2 center = Vec2::Zero();  // meters
};

// Earliest predicted violation found in the previous-step predictions.
// direction is the difference vector from the other body to this robot's
// predicted position at `step` (so its norm equals distance), and `bound`
// is the right-hand side of the linearized half space
//   direction^T x >= bound.
struct CollisionEvent {
  int step = 0;  // 1-based index into the stacked prediction
  double distance = 0.0;
  Vec2 direction = Vec2::Zero();
  double bound = 0.0;
};

struct ConstraintSource {
  enum class Kind { kRobot, kObstacle };
  Kind kind = Kind::kRobot;
  int index = 0;
};

// One row of the input-space inequality  row^T U <= rhs  equivalent to the
// position-space half space g^T X >= c under X = F x + Phi U.
struct CollisionConstraint {
  VecX row;
  double rhs = 0.0;
  ConstraintSource source;
};

// Scans two previous-step predictions (truncated to the shorter horizon) for
// the earliest step whose distance drops below r_min.
std::optional<CollisionEvent> detect_collision(const StackedTrajectory& pred_i,
                                               const StackedTrajectory& pred_j,
                                               double r_min);

// Same against a static obstacle, over the full prediction.
std::optional<CollisionEvent> detect_collision(const StackedTrajectory& pred_i,
                                               const Obstacle& obstacle,
                                               double r_min);

// Embeds the 2-vector b at block `step` (1-based) of a 2*horizon vector,
// zeros elsewhere. Steps beyond the current horizon are clamped to the
// terminal block so a shrinking horizon keeps the constraint in view.
VecX embed_at_step(const Vec2& b, int step, int horizon);

CollisionConstraint build_constraint(const VecX& g, const PredictionMatrices& pm,
                                     const RobotState& x_meas, double bound);

// Full per-robot pass: detects against every other robot's previous-step
// prediction and every obstacle, and emits one constraint per violating
// source (earliest step each).
std::vector<CollisionConstraint> collision_constraints_for_robot(
    int robot_id, std::span<const StackedTrajectory> prev_predictions,
    std::span<const Obstacle> obstacles, const PredictionMatrices& pm_now,
    const RobotState& x_meas, double r_min);

}  // namespace vhmpc

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

#include "vhmpc/collision.hpp"

#include <algorithm>

namespace vhmpc {

namespace {

// Earliest step (1-based) of pred_i whose distance to the per-step point
// given by `other_at` falls strictly below r_min.
template <typename OtherAt>
std::optional<CollisionEvent> scan(const StackedTrajectory& pred_i, int steps,
                                   OtherAt&& other_at, double r_min) {
  for (int k = 1; k <= steps; ++k) {
    const Vec2 xi = pred_i.block(k - 1);
    const Vec2 diff = xi - other_at(k - 1);
    const double d = diff.norm();
    if (d > 0.0 && d < r_min) {
      CollisionEvent ev;
      ev.step = k;
      ev.distance = d;
      ev.direction = diff;
      // Tangent half space to the r_min disc along the line through the
      // predicted point: (r_min*d - d^2) + b^T x_hat.
      ev.bound = (r_min * d - d * d) + diff.dot(xi);
      return ev;
    }
  }
  return std::nullopt;
}

void check_nonempty(const StackedTrajectory& t, const char* what) {
  require(t.horizon >= 1 && t.values.size() == 2 * t.horizon, what);
}

}  // namespace

std::optional<CollisionEvent> detect_collision(const StackedTrajectory& pred_i,
                                               const StackedTrajectory& pred_j,
                                               double r_min) {
  check_nonempty(pred_i, "detect_collision: empty prediction for robot i");
  check_nonempty(pred_j, "detect_collision: empty prediction for robot j");
  const int n_min = std::min(pred_i.horizon, pred_j.horizon);
  return scan(pred_i, n_min, [&](int idx) { return pred_j.block(idx); }, r_min);
}

std::optional<CollisionEvent> detect_collision(const StackedTrajectory& pred_i,
                                               const Obstacle& obstacle,
                                               double r_min) {
  check_nonempty(pred_i, "detect_collision: empty prediction");
  return scan(pred_i, pred_i.horizon, [&](int) { return obstacle.center; }, r_min);
}

VecX embed_at_step(const Vec2& b, int step, int horizon) {
  require(step >= 1, "embed_at_step: step must be at least 1");
  require(horizon >= 1, "embed_at_step: horizon must be at least 1");
  const int placed = std::min(step, horizon);
  VecX g = VecX::Zero(2 * horizon);
  g.segment<2>(2 * (placed - 1)) = b;
  return g;
}

CollisionConstraint build_constraint(const VecX& g, const PredictionMatrices& pm,
                                     const RobotState& x_meas, double bound) {
  require(g.size() == 2 * pm.horizon, "build_constraint: g does not match the horizon");
  CollisionConstraint c;
  c.row = -(pm.Phi.transpose() * g);
  c.rhs = g.dot(pm.F * x_meas.position) - bound;
  return c;
}

std::vector<CollisionConstraint> collision_constraints_for_robot(
    int robot_id, std::span<const StackedTrajectory> prev_predictions,
    std::span<const Obstacle> obstacles, const PredictionMatrices& pm_now,
    const RobotState& x_meas, double r_min) {
  require(robot_id >= 0 && robot_id < static_cast<int>(prev_predictions.size()),
          "collision_constraints_for_robot: robot id out of range");
  const StackedTrajectory& own = prev_predictions[robot_id];

  std::vector<CollisionConstraint> out;
  auto emit = [&](const CollisionEvent& ev, ConstraintSource src) {
    // The constraint targets the step after the one where the violation was
    // observed, which in the current stack is block ev.step (clamped).
    const VecX g = embed_at_step(ev.direction, ev.step, pm_now.horizon);
    CollisionConstraint c = build_constraint(g, pm_now, x_meas, ev.bound);
    c.source = src;
    out.push_back(std::move(c));
  };

  for (int j = 0; j < static_cast<int>(prev_predictions.size()); ++j) {
    if (j == robot_id) continue;
    if (auto ev = detect_collision(own, prev_predictions[j], r_min)) {
      emit(*ev, {ConstraintSource::Kind::kRobot, j});
    }
  }
  for (int l = 0; l < static_cast<int>(obstacles.size()); ++l) {
    if (auto ev = detect_collision(own, obstacles[l], r_min)) {
      emit(*ev, {ConstraintSource::Kind::kObstacle, l});
    }
  }
  return out;
}

}  // namespace vhmpc

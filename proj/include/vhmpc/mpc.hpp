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

#include <span>
#include <utility>

#include "vhmpc/collision.hpp"
#include "vhmpc/prediction.hpp"
#include "vhmpc/qp.hpp"

namespace vhmpc {

struct MpcConfig {
  double q_weight = 5.0;   // tracking weight, Q = q*I
  double w_weight = 10.0;  // input weight, W = w*I (must stay > 0)
  double h = 0.2;          // seconds
  double lb = -1.5;        // input lower bound, m/s per axis
  double ub = 1.5;         // input upper bound, m/s per axis
  double r_min = 1.5;      // meters
  // Weight on squared collision-row slack in the relaxed fallback solve.
  double slack_penalty = 1e5;

  void validate() const;
};

// Set-point reference: the goal repeated over the current horizon.
struct DesiredTrajectory {
  Vec2 goal = Vec2::Zero();

  StackedTrajectory stacked(int horizon) const { return repeat_point(goal, horizon); }
};

struct MpcStepResult {
  ControlInput u0;
  StackedTrajectory predicted;  // kept for the next step's collision pass
  VecX input_sequence;          // full optimizer output, for warm starting
  int collision_rows = 0;
  QpStatus qp_status = QpStatus::kOptimal;
  bool used_fallback = false;
};

// Quadratic cost (H, f) such that 0.5 U^T H U + f^T U matches the tracking
// plus input-effort objective up to an input-independent constant:
//   H = 2 (Phi^T Q Phi + W),  f = -2 Phi^T Q (X_d - F x).
std::pair<MatX, VecX> build_cost(const PredictionMatrices& pm,
                                 const RobotState& x_meas,
                                 const DesiredTrajectory& desired,
                                 const MpcConfig& cfg);

// Stacks collision rows followed by the box bounds (-U <= -lb, U <= ub),
// giving m_coll + 4N rows in total.
std::pair<MatX, VecX> assemble_inequalities(
    std::span<const CollisionConstraint> collision,
    const PredictionMatrices& pm, const MpcConfig& cfg);

// One receding-horizon solve. Conflicting collision half-spaces (the hard QP
// reports infeasible) are relaxed with penalized slack variables so the robot
// still makes its best effort to separate; the step is flagged as a fallback.
MpcStepResult mpc_step(const PredictionMatrices& pm, const RobotState& x_meas,
                       const DesiredTrajectory& desired,
                       std::span<const CollisionConstraint> collision,
                       const MpcConfig& cfg, const VecX* warm_start = nullptr);

}  // namespace vhmpc

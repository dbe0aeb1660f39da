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

#include "vhmpc/linalg.hpp"

namespace vhmpc {

// Hard upper bound on the per-robot prediction horizon.
inline constexpr int kMaxHorizon = 49;

struct RobotState {
  Vec2 position = Vec2::Zero();  // meters
};

struct ControlInput {
  Vec2 velocity = Vec2::Zero();  // meters/second
};

// Discrete-time single-integrator model x[k+1] = A x[k] + B u[k] with
// A = I and B = h*I for sampling time h.
struct ModelParams {
  double h = 0.0;
  Mat2 A = Mat2::Identity();
  Mat2 B = Mat2::Identity();
};

// Stacked prediction matrices for a horizon of N steps:
//   X = F x0 + Phi U
// where X and U stack N two-dimensional blocks. Row block r of F is A^(r+1)
// and block (r, c) of Phi is A^(r-c) B for r >= c, zero above the diagonal.
struct PredictionMatrices {
  int horizon = 0;
  MatX F;    // 2N x 2
  MatX Phi;  // 2N x 2N
};

// A stacked sequence of N two-dimensional blocks (positions or inputs).
struct StackedTrajectory {
  int horizon = 0;
  VecX values;  // length 2N

  Vec2 block(int step) const { return values.segment<2>(2 * step); }
};

ModelParams build_model(double h);

PredictionMatrices build_prediction_matrices(const ModelParams& model, int horizon);

// Same stacking for arbitrary 2x2 A, B (testing hook; the simulator only
// ever uses the single-integrator model).
PredictionMatrices build_prediction_matrices(const Mat2& A, const Mat2& B, int horizon);

StackedTrajectory propagate(const PredictionMatrices& pm, const RobotState& x0,
                            const StackedTrajectory& inputs);

// Keeps the first new_horizon blocks.
StackedTrajectory truncate_to(const StackedTrajectory& traj, int new_horizon);

// Stacks the same point N times (used to seed first-step predictions and to
// build set-point reference trajectories).
StackedTrajectory repeat_point(const Vec2& p, int horizon);

}  // namespace vhmpc

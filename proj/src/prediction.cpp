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

#include "vhmpc/prediction.hpp"

namespace vhmpc {

ModelParams build_model(double h) {
  require(h > 0.0 && std::isfinite(h), "build_model: sampling time must be positive");
  ModelParams m;
  m.h = h;
  m.A = Mat2::Identity();
  m.B = h * Mat2::Identity();
  return m;
}

PredictionMatrices build_prediction_matrices(const ModelParams& model, int horizon) {
  return build_prediction_matrices(model.A, model.B, horizon);
}

PredictionMatrices build_prediction_matrices(const Mat2& A, const Mat2& B, int horizon) {
  require(horizon >= 1 && horizon <= kMaxHorizon,
          "build_prediction_matrices: horizon out of [1, 49]");
  PredictionMatrices pm;
  pm.horizon = horizon;
  pm.F.setZero(2 * horizon, 2);
  pm.Phi.setZero(2 * horizon, 2 * horizon);

  Mat2 a_pow = A;  // A^(r+1) for row block r
  for (int r = 0; r < horizon; ++r) {
    pm.F.block<2, 2>(2 * r, 0) = a_pow;
    if (r + 1 < horizon) a_pow = A * a_pow;
  }
  // Block column c of Phi is [0; ...; B; AB; A^2 B; ...] starting at row c.
  for (int c = 0; c < horizon; ++c) {
    Mat2 blk = B;
    for (int r = c; r < horizon; ++r) {
      pm.Phi.block<2, 2>(2 * r, 2 * c) = blk;
      if (r + 1 < horizon) blk = A * blk;
    }
  }
  return pm;
}

StackedTrajectory propagate(const PredictionMatrices& pm, const RobotState& x0,
                            const StackedTrajectory& inputs) {
  require(inputs.values.size() == 2 * pm.horizon && inputs.horizon == pm.horizon,
          "propagate: input stack does not match the horizon");
  StackedTrajectory out;
  out.horizon = pm.horizon;
  out.values = pm.F * x0.position + pm.Phi * inputs.values;
  return out;
}

StackedTrajectory truncate_to(const StackedTrajectory& traj, int new_horizon) {
  require(new_horizon >= 1, "truncate_to: horizon must be at least 1");
  require(new_horizon <= traj.horizon, "truncate_to: cannot extend a trajectory");
  StackedTrajectory out;
  out.horizon = new_horizon;
  out.values = traj.values.head(2 * new_horizon);
  return out;
}

StackedTrajectory repeat_point(const Vec2& p, int horizon) {
  require(horizon >= 1, "repeat_point: horizon must be at least 1");
  StackedTrajectory out;
  out.horizon = horizon;
  out.values.resize(2 * horizon);
  for (int r = 0; r < horizon; ++r) out.values.segment<2>(2 * r) = p;
  return out;
}

}  // namespace vhmpc

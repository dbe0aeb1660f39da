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

#include "vhmpc/oracles.hpp"
#include "vhmpc/prediction.hpp"
#include "vhmpc/rng.hpp"

using namespace vhmpc;

TEST_CASE("build_model produces the single-integrator discretization") {
  const ModelParams m = build_model(0.2);
  CHECK(m.A.isApprox(Mat2::Identity()));
  CHECK(m.B.isApprox(0.2 * Mat2::Identity()));

  const ModelParams unit = build_model(1.0);
  CHECK(unit.B.isApprox(Mat2::Identity()));

  CHECK_THROWS_AS(build_model(0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_model(-0.1), std::invalid_argument);
}

TEST_CASE("prediction matrices match the hand-expanded two-step case") {
  const PredictionMatrices pm = build_prediction_matrices(build_model(0.2), 2);
  REQUIRE(pm.F.rows() == 4);
  REQUIRE(pm.Phi.rows() == 4);
  CHECK(pm.F.block<2, 2>(0, 0).isApprox(Mat2::Identity()));
  CHECK(pm.F.block<2, 2>(2, 0).isApprox(Mat2::Identity()));
  CHECK(pm.Phi.block<2, 2>(0, 0).isApprox(0.2 * Mat2::Identity()));
  CHECK(pm.Phi.block<2, 2>(0, 2).isZero());
  CHECK(pm.Phi.block<2, 2>(2, 0).isApprox(0.2 * Mat2::Identity()));
  CHECK(pm.Phi.block<2, 2>(2, 2).isApprox(0.2 * Mat2::Identity()));

  const PredictionMatrices single = build_prediction_matrices(build_model(0.2), 1);
  CHECK(single.F.isApprox(Mat2::Identity()));
  CHECK(single.Phi.isApprox(0.2 * Mat2::Identity()));

  CHECK_THROWS_AS(build_prediction_matrices(build_model(0.2), 50),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_prediction_matrices(build_model(0.2), 0),
                  std::invalid_argument);
}

TEST_CASE("general A, B stacking powers the state matrix") {
  Mat2 A;
  A << 1.0, 0.1, 0.0, 0.9;
  Mat2 B;
  B << 0.2, 0.0, 0.05, 0.2;
  const PredictionMatrices pm = build_prediction_matrices(A, B, 3);
  CHECK(pm.F.block<2, 2>(4, 0).isApprox(A * A * A, 1e-14));
  CHECK(pm.Phi.block<2, 2>(4, 0).isApprox(A * A * B, 1e-14));
  CHECK(pm.Phi.block<2, 2>(4, 2).isApprox(A * B, 1e-14));
  CHECK(pm.Phi.block<2, 2>(2, 4).isZero());
}

TEST_CASE("propagate matches hand rollouts") {
  const PredictionMatrices pm = build_prediction_matrices(build_model(0.2), 2);

  StackedTrajectory u;
  u.horizon = 2;
  u.values.resize(4);
  u.values << 1, 1, 1, 1;
  StackedTrajectory x = propagate(pm, {{0, 0}}, u);
  CHECK(x.block(0).isApprox(Vec2{0.2, 0.2}));
  CHECK(x.block(1).isApprox(Vec2{0.4, 0.4}));

  u.values << 0, 0, 0, 0;
  x = propagate(pm, {{1, 2}}, u);
  CHECK(x.block(0).isApprox(Vec2{1, 2}));
  CHECK(x.block(1).isApprox(Vec2{1, 2}));

  u.values << 1, 0, 0, 1;
  x = propagate(pm, {{0, 0}}, u);
  CHECK(x.block(0).isApprox(Vec2{0.2, 0.0}));
  CHECK(x.block(1).isApprox(Vec2{0.2, 0.2}));

  StackedTrajectory bad;
  bad.horizon = 1;
  bad.values.resize(2);
  CHECK_THROWS_AS(propagate(pm, {{0, 0}}, bad), std::invalid_argument);
}

TEST_CASE("stacked propagation equals sequential rollout on random cases") {
  Rng rng(1234);
  double worst = 0.0;
  for (int c = 0; c < 300; ++c) {
    const int n = 1 + rng.uniform_int(kMaxHorizon);
    const ModelParams model = build_model(rng.uniform(0.05, 1.0));
    const PredictionMatrices pm = build_prediction_matrices(model, n);
    StackedTrajectory u;
    u.horizon = n;
    u.values.resize(2 * n);
    for (int i = 0; i < 2 * n; ++i) u.values(i) = rng.uniform(-2.0, 2.0);
    const Vec2 x0{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
    const auto stacked = propagate(pm, {x0}, u);
    const auto rolled = oracles::sequential_rollout(model.A, model.B, x0, u);
    worst = std::max(worst, (stacked.values - rolled.values).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("Phi stays block-lower-triangular and rebuilds bit-identically") {
  const ModelParams model = build_model(0.2);
  for (int n : {1, 5, 23, 49}) {
    const PredictionMatrices pm = build_prediction_matrices(model, n);
    for (int r = 0; r < n; ++r) {
      for (int c = r + 1; c < n; ++c) {
        CHECK(pm.Phi.block<2, 2>(2 * r, 2 * c).cwiseAbs().maxCoeff() == 0.0);
      }
    }
    const PredictionMatrices again = build_prediction_matrices(model, n);
    CHECK(pm.F == again.F);
    CHECK(pm.Phi == again.Phi);
  }
}

TEST_CASE("truncate_to keeps leading blocks in order") {
  StackedTrajectory t;
  t.horizon = 5;
  t.values.resize(10);
  for (int i = 0; i < 10; ++i) t.values(i) = i;

  const StackedTrajectory cut = truncate_to(t, 3);
  REQUIRE(cut.horizon == 3);
  CHECK(cut.values.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(cut.values(i) == i);

  const StackedTrajectory same = truncate_to(t, 5);
  CHECK(same.values == t.values);

  CHECK_THROWS_AS(truncate_to(t, 6), std::invalid_argument);
  CHECK_THROWS_AS(truncate_to(t, 0), std::invalid_argument);
}

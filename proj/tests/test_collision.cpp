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

#include "vhmpc/collision.hpp"
#include "vhmpc/oracles.hpp"
#include "vhmpc/rng.hpp"

using namespace vhmpc;

namespace {

StackedTrajectory traj(std::initializer_list<Vec2> points) {
  StackedTrajectory t;
  t.horizon = static_cast<int>(points.size());
  t.values.resize(2 * t.horizon);
  int i = 0;
  for (const Vec2& p : points) t.values.segment<2>(2 * i++) = p;
  return t;
}

}  // namespace

TEST_CASE("detect_collision against an obstacle: hand-worked events") {
  SUBCASE("single step inside r_min") {
    const auto ev = detect_collision(traj({{1, 0}}), Obstacle{{0, 0}}, 1.5);
    REQUIRE(ev.has_value());
    CHECK(ev->step == 1);
    CHECK(ev->distance == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev->direction.isApprox(Vec2{1, 0}));
    CHECK(ev->bound == doctest::Approx(1.5).epsilon(1e-12));
  }
  SUBCASE("earliest violating step wins") {
    const auto ev = detect_collision(traj({{3, 0}, {2, 0}, {1.4, 0}}),
                                     Obstacle{{0, 0}}, 1.5);
    REQUIRE(ev.has_value());
    CHECK(ev->step == 3);
    CHECK(ev->distance == doctest::Approx(1.4).epsilon(1e-12));
    CHECK(ev->direction.isApprox(Vec2{1.4, 0}));
    CHECK(ev->bound == doctest::Approx(2.1).epsilon(1e-12));
  }
  SUBCASE("far trajectory yields nothing") {
    CHECK_FALSE(detect_collision(traj({{5, 5}}), Obstacle{{0, 0}}, 1.5).has_value());
  }
  SUBCASE("empty prediction is rejected") {
    StackedTrajectory empty;
    CHECK_THROWS_AS(detect_collision(empty, Obstacle{{0, 0}}, 1.5),
                    std::invalid_argument);
  }
}

TEST_CASE("robot-robot detection truncates to the shorter horizon") {
  // 5-step vs 3-step prediction: steps 4 and 5 would violate but only the
  // first three are compared.
  const auto a = traj({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}});
  const auto b = traj({{0, 10}, {1, 10}, {2.0, 10}});
  CHECK_FALSE(detect_collision(a, b, 1.5).has_value());

  const auto c = traj({{0, 0.5}, {1, 0.5}, {2, 0.5}});
  const auto ev = detect_collision(a, c, 1.5);
  REQUIRE(ev.has_value());
  CHECK(ev->step == 1);
  CHECK(ev->direction.isApprox(Vec2{0, -0.5}));
}

TEST_CASE("swapping the robots negates the difference vector exactly") {
  Rng rng(99);
  for (int c = 0; c < 50; ++c) {
    const int n = 1 + rng.uniform_int(8);
    StackedTrajectory a, b;
    a.horizon = b.horizon = n;
    a.values.resize(2 * n);
    b.values.resize(2 * n);
    for (int i = 0; i < 2 * n; ++i) {
      a.values(i) = rng.uniform(-2.0, 2.0);
      b.values(i) = rng.uniform(-2.0, 2.0);
    }
    const auto ev_ab = detect_collision(a, b, 1.5);
    const auto ev_ba = detect_collision(b, a, 1.5);
    REQUIRE(ev_ab.has_value() == ev_ba.has_value());
    if (ev_ab) {
      CHECK(ev_ab->step == ev_ba->step);
      CHECK(ev_ab->direction == -ev_ba->direction);
    }
  }
}

TEST_CASE("embed_at_step places the vector at the requested block") {
  const Vec2 b{1, 2};
  VecX g = embed_at_step(b, 1, 3);
  CHECK(g.isApprox((VecX(6) << 1, 2, 0, 0, 0, 0).finished()));
  g = embed_at_step(b, 2, 3);
  CHECK(g.isApprox((VecX(6) << 0, 0, 1, 2, 0, 0).finished()));
  g = embed_at_step(b, 3, 3);
  CHECK(g.isApprox((VecX(6) << 0, 0, 0, 0, 1, 2).finished()));
  // beyond the horizon: clamped to the terminal block
  g = embed_at_step(b, 5, 3);
  CHECK(g.isApprox((VecX(6) << 0, 0, 0, 0, 1, 2).finished()));

  CHECK_THROWS_AS(embed_at_step(b, 0, 3), std::invalid_argument);
}

TEST_CASE("build_constraint matches the hand-evaluated single-step case") {
  const PredictionMatrices pm = build_prediction_matrices(build_model(0.2), 1);
  const VecX g = (VecX(2) << 1, 0).finished();
  const CollisionConstraint c = build_constraint(g, pm, {{0, 0}}, 1.5);
  CHECK(c.row.isApprox((VecX(2) << -0.2, 0).finished()));
  CHECK(c.rhs == doctest::Approx(-1.5).epsilon(1e-15));

  const CollisionConstraint zero = build_constraint(VecX::Zero(2), pm, {{0, 0}}, 1.5);
  CHECK(zero.row.isZero());
  CHECK(zero.rhs == doctest::Approx(-1.5));

  CHECK_THROWS_AS(build_constraint(VecX::Zero(4), pm, {{0, 0}}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("input half space implies the position half space") {
  Rng rng(7);
  const ModelParams model = build_model(0.2);
  for (int c = 0; c < 100; ++c) {
    const int n = 1 + rng.uniform_int(10);
    const PredictionMatrices pm = build_prediction_matrices(model, n);
    const Vec2 b{rng.normal(), rng.normal()};
    const int step = 1 + rng.uniform_int(n + 3);  // sometimes beyond n
    const VecX g = embed_at_step(b, step, n);
    const RobotState x{{rng.uniform(-5, 5), rng.uniform(-5, 5)}};
    const double bound = rng.uniform(-2.0, 2.0);
    const CollisionConstraint con = build_constraint(g, pm, x, bound);
    for (int t = 0; t < 5; ++t) {
      VecX u(2 * n);
      for (int i = 0; i < 2 * n; ++i) u(i) = rng.uniform(-1.5, 1.5);
      const double lhs = con.row.dot(u);
      if (lhs > con.rhs && con.row.squaredNorm() > 0) {
        u += con.row * ((con.rhs - lhs) / con.row.squaredNorm());
      }
      const VecX positions = pm.F * x.position + pm.Phi * u;
      CHECK(g.dot(positions) >= bound - 1e-9);
    }
  }
}

TEST_CASE("per-robot pass emits one constraint per violating source") {
  const PredictionMatrices pm = build_prediction_matrices(build_model(0.2), 3);
  const double r_min = 1.5;

  SUBCASE("two robots on a near pass") {
    std::vector<StackedTrajectory> preds = {
        traj({{0, 0}, {0.5, 0}, {1.0, 0}}),
        traj({{2.0, 0}, {1.5, 0}, {1.2, 0}}),
    };
    const auto cons = collision_constraints_for_robot(0, preds, {}, pm, {{0, 0}}, r_min);
    REQUIRE(cons.size() == 1);
    CHECK(cons[0].source.kind == ConstraintSource::Kind::kRobot);
    CHECK(cons[0].source.index == 1);
    CHECK(cons[0].row.size() == 6);
  }

  SUBCASE("a robot and an obstacle at once give two constraints") {
    std::vector<StackedTrajectory> preds = {
        traj({{0, 0}, {0.5, 0}, {1.0, 0}}),
        traj({{1.0, 1.0}, {1.0, 0.8}, {1.0, 0.6}}),
    };
    std::vector<Obstacle> obstacles = {{{0.5, -1.0}}};
    const auto cons =
        collision_constraints_for_robot(0, preds, obstacles, pm, {{0, 0}}, r_min);
    REQUIRE(cons.size() == 2);
    CHECK(cons[0].source.kind == ConstraintSource::Kind::kRobot);
    CHECK(cons[1].source.kind == ConstraintSource::Kind::kObstacle);
    CHECK(cons[1].source.index == 0);
  }

  SUBCASE("no predicted violation emits nothing") {
    std::vector<StackedTrajectory> preds = {
        traj({{0, 0}, {0.5, 0}, {1.0, 0}}),
        traj({{10, 10}, {10, 10}, {10, 10}}),
    };
    CHECK(collision_constraints_for_robot(0, preds, {}, pm, {{0, 0}}, r_min).empty());
  }
}

TEST_CASE("linearization touches the r_min circle") {
  Rng rng(31);
  int events = 0;
  for (int c = 0; c < 200; ++c) {
    const int n = 2 + rng.uniform_int(10);
    StackedTrajectory pred;
    pred.horizon = n;
    pred.values.resize(2 * n);
    for (int i = 0; i < 2 * n; ++i) pred.values(i) = rng.uniform(-2.0, 2.0);
    const Obstacle obs{{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)}};
    const auto ev = detect_collision(pred, obs, 1.5);
    if (!ev) continue;
    ++events;
    CHECK(oracles::tangency_gap(*ev, obs.center, 1.5) <= 1e-9);
  }
  CHECK(events > 20);
}

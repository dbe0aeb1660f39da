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
#include "vhmpc/qp.hpp"
#include "vhmpc/rng.hpp"
#include "vhmpc/selftest.hpp"

using namespace vhmpc;

namespace {

QuadraticProgram box_1d(double target, double upper) {
  // min (u - target)^2 s.t. u <= upper
  QuadraticProgram qp;
  qp.H = MatX::Constant(1, 1, 2.0);
  qp.f = VecX::Constant(1, -2.0 * target);
  qp.A = MatX::Constant(1, 1, 1.0);
  qp.b = VecX::Constant(1, upper);
  return qp;
}

}  // namespace

TEST_CASE("active bound is found") {
  const QpSolution sol = solve(box_1d(1.0, 0.5));
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK(sol.u(0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("unconstrained minimum") {
  QuadraticProgram qp;
  qp.H = MatX::Constant(1, 1, 2.0);
  qp.f = VecX::Zero(1);
  qp.A.resize(0, 1);
  qp.b.resize(0);
  const QpSolution sol = solve(qp);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK(sol.u(0) == doctest::Approx(0.0));
}

TEST_CASE("interior solution of the one-step tracking problem") {
  QuadraticProgram qp;
  qp.H = 20.4 * MatX::Identity(2, 2);
  qp.f = (VecX(2) << -2.0, 0.0).finished();
  qp.A.resize(4, 2);
  qp.A << -MatX::Identity(2, 2), MatX::Identity(2, 2);
  qp.b = (VecX(4) << 1.5, 1.5, 1.5, 1.5).finished();
  const QpSolution sol = solve(qp);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK(sol.u(0) == doctest::Approx(2.0 / 20.4).epsilon(1e-9));
  CHECK(sol.u(1) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("conflicting constraints are certified infeasible") {
  // u <= -1 and u >= 1
  QuadraticProgram qp;
  qp.H = MatX::Constant(1, 1, 2.0);
  qp.f = VecX::Zero(1);
  qp.A.resize(2, 1);
  qp.A << 1.0, -1.0;
  qp.b = (VecX(2) << -1.0, -1.0).finished();
  const QpSolution sol = solve(qp);
  CHECK(sol.status == QpStatus::kInfeasible);
}

TEST_CASE("invalid problems are rejected") {
  QuadraticProgram qp;
  qp.H = -MatX::Identity(2, 2);  // not PD
  qp.f = VecX::Zero(2);
  qp.A.resize(0, 2);
  qp.b.resize(0);
  CHECK_THROWS_AS(solve(qp), std::invalid_argument);

  qp.H = MatX::Identity(2, 2);
  qp.f = VecX::Constant(2, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(solve(qp), std::invalid_argument);

  qp.f = VecX::Zero(2);
  qp.H(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(solve(qp), std::invalid_argument);
}

TEST_CASE("kkt_check accepts optima and rejects perturbations") {
  const QuadraticProgram qp = box_1d(1.0, 0.5);
  const QpSolution sol = solve(qp);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK(kkt_check(qp, sol.u, sol.dual, 1e-6).ok);

  // perturb along the active constraint normal by 10x the tolerance
  VecX u = sol.u;
  u(0) += 10e-6;
  CHECK_FALSE(kkt_check(qp, u, sol.dual, 1e-6).ok);

  // unconstrained stationary point passes with an empty multiplier
  QuadraticProgram free_qp;
  free_qp.H = MatX::Constant(1, 1, 4.0);
  free_qp.f = VecX::Constant(1, -4.0);
  free_qp.A.resize(0, 1);
  free_qp.b.resize(0);
  CHECK(kkt_check(free_qp, VecX::Constant(1, 1.0), VecX(), 1e-6).ok);

  CHECK_THROWS_AS(kkt_check(qp, VecX::Zero(2), sol.dual, 1e-6),
                  std::invalid_argument);
}

TEST_CASE("solver matches brute-force enumeration on random problems") {
  const auto suite = selftest::qp_oracle_suite(120, 2024);
  INFO(suite.detail);
  CHECK(suite.passed);
}

TEST_CASE("objective at the solution beats random feasible points") {
  Rng rng(55);
  for (int c = 0; c < 20; ++c) {
    const int n = 1 + rng.uniform_int(3);
    QuadraticProgram qp;
    MatX M(n, n);
    for (int i = 0; i < n * n; ++i) M(i / n, i % n) = rng.normal();
    qp.H = M.transpose() * M + 0.5 * MatX::Identity(n, n);
    qp.f.resize(n);
    for (int i = 0; i < n; ++i) qp.f(i) = rng.normal();
    // box around a random center so sampling feasible points is easy
    qp.A.resize(2 * n, n);
    qp.A << MatX::Identity(n, n), -MatX::Identity(n, n);
    qp.b = VecX::Constant(2 * n, 1.0);
    const QpSolution sol = solve(qp);
    REQUIRE(sol.status == QpStatus::kOptimal);
    auto objective = [&](const VecX& u) {
      return 0.5 * u.dot(qp.H * u) + qp.f.dot(u);
    };
    const double opt = objective(sol.u);
    for (int t = 0; t < 50; ++t) {
      VecX u(n);
      for (int i = 0; i < n; ++i) u(i) = rng.uniform(-1.0, 1.0);
      CHECK(opt <= objective(u) + 1e-9);
    }
  }
}

TEST_CASE("identical inputs give bit-identical solutions") {
  QuadraticProgram qp;
  qp.H = 20.4 * MatX::Identity(2, 2);
  qp.f = (VecX(2) << -2.0, 0.7).finished();
  qp.A.resize(4, 2);
  qp.A << -MatX::Identity(2, 2), MatX::Identity(2, 2);
  qp.b = (VecX(4) << 0.05, 1.5, 0.05, 1.5).finished();
  const QpSolution a = solve(qp);
  const QpSolution b = solve(qp);
  CHECK(a.u == b.u);
  CHECK(a.dual == b.dual);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("warm start does not change the answer") {
  QuadraticProgram qp = box_1d(2.0, 0.5);
  const QpSolution cold = solve(qp);
  const VecX warm = VecX::Constant(1, 0.49);
  const QpSolution warmed = solve(qp, {}, &warm);
  REQUIRE(warmed.status == QpStatus::kOptimal);
  CHECK(warmed.u(0) == doctest::Approx(cold.u(0)).epsilon(1e-9));
}

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

#include "vhmpc/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vhmpc/collision.hpp"
#include "vhmpc/oracles.hpp"
#include "vhmpc/prediction.hpp"
#include "vhmpc/qp.hpp"
#include "vhmpc/rng.hpp"

namespace vhmpc::selftest {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

SuiteResult prediction_suite(int cases, std::uint64_t seed) {
  Rng rng(seed);
  double max_err = 0.0;
  for (int c = 0; c < cases; ++c) {
    const double h = c % 3 == 0 ? 0.2 : rng.uniform(0.05, 1.0);
    const int n = 1 + rng.uniform_int(kMaxHorizon);
    const ModelParams model = build_model(h);
    const PredictionMatrices pm = build_prediction_matrices(model, n);
    const Vec2 x0{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
    StackedTrajectory inputs;
    inputs.horizon = n;
    inputs.values.resize(2 * n);
    for (int i = 0; i < 2 * n; ++i) inputs.values(i) = rng.uniform(-2.0, 2.0);
    const StackedTrajectory stacked = propagate(pm, {x0}, inputs);
    const StackedTrajectory rolled =
        oracles::sequential_rollout(model.A, model.B, x0, inputs);
    max_err = std::max(max_err,
                       (stacked.values - rolled.values).cwiseAbs().maxCoeff());
  }
  return {"prediction-vs-sequential-rollout", max_err <= 1e-12,
          std::to_string(cases) + " cases, max err " + fmt(max_err)};
}

SuiteResult qp_oracle_suite(int cases, std::uint64_t seed) {
  Rng rng(seed);
  double max_dev = 0.0;
  double max_kkt = 0.0;
  int failures = 0;
  for (int c = 0; c < cases; ++c) {
    const int n = 1 + rng.uniform_int(4);
    const int m = rng.uniform_int(7);
    QuadraticProgram qp;
    MatX M(n, n);
    for (int i = 0; i < n * n; ++i) M(i / n, i % n) = rng.normal();
    qp.H = M.transpose() * M;
    qp.H.diagonal().array() += rng.uniform(0.1, 1.0);
    qp.f.resize(n);
    for (int i = 0; i < n; ++i) qp.f(i) = rng.normal();
    qp.A.resize(m, n);
    qp.b.resize(m);
    VecX u0(n);
    for (int i = 0; i < n; ++i) u0(i) = rng.normal();
    for (int r = 0; r < m; ++r) {
      for (int i = 0; i < n; ++i) qp.A(r, i) = rng.normal();
      qp.b(r) = qp.A.row(r).dot(u0) + rng.uniform(0.0, 1.0);
    }

    const QpSolution sol = solve(qp);
    const auto oracle = oracles::enumerate_qp(qp);
    if (sol.status != QpStatus::kOptimal || !oracle) {
      ++failures;
      continue;
    }
    max_dev = std::max(max_dev, (sol.u - *oracle).cwiseAbs().maxCoeff());
    const KktReport rep = kkt_check(qp, sol.u, sol.dual, 1e-6);
    max_kkt = std::max({max_kkt, rep.primal, rep.dual, rep.stationarity,
                        rep.complementarity});
    if (!rep.ok) ++failures;
  }
  const bool ok = failures == 0 && max_dev <= 1e-6 && max_kkt <= 1e-6;
  return {"qp-vs-active-set-enumeration", ok,
          std::to_string(cases) + " cases, max |u - oracle| " + fmt(max_dev) +
              ", max KKT residual " + fmt(max_kkt) +
              (failures ? ", " + std::to_string(failures) + " failures" : "")};
}

SuiteResult gradient_suite(int nets, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int c = 0; c < nets; ++c) {
    std::vector<int> dims;
    dims.push_back(2 + rng.uniform_int(5));
    const int hidden_layers = 1 + rng.uniform_int(2);
    for (int l = 0; l < hidden_layers; ++l) dims.push_back(3 + rng.uniform_int(14));
    dims.push_back(1 + rng.uniform_int(4));
    nn::Mlp net = nn::make_mlp(dims, rng);

    const int batch = 1 + rng.uniform_int(3);
    nn::Mat x(batch, dims.front());
    nn::Mat w(batch, dims.back());
    for (double& v : w.d) v = rng.normal();

    // Central differences are not a valid oracle on a ReLU kink (a batch row
    // that dies entirely in one layer puts the next layer's pre-activations
    // exactly at zero), so resample inputs until the net is locally smooth.
    for (int attempt = 0; attempt < 50; ++attempt) {
      for (double& v : x.d) v = rng.normal();
      nn::ForwardCache probe;
      nn::forward(net, x, &probe);
      double min_pre = 1e300;
      for (size_t l = 0; l + 1 < probe.pre.size(); ++l) {
        for (double v : probe.pre[l].d) min_pre = std::min(min_pre, std::abs(v));
      }
      if (min_pre > 1e-3) break;
    }

    auto loss = [&]() {
      const nn::Mat y = nn::forward(net, x);
      double s = 0.0;
      for (size_t i = 0; i < y.d.size(); ++i) s += w.d[i] * y.d[i];
      return s;
    };

    nn::ForwardCache cache;
    nn::forward(net, x, &cache);
    nn::Gradients analytic = nn::zero_gradients(net);
    nn::backward(net, cache, w, analytic);
    const nn::Gradients fd = oracles::finite_difference_gradients(net, loss);
    worst = std::max(worst, oracles::relative_gradient_error(analytic, fd));
  }
  return {"gradients-vs-finite-differences", worst <= 1e-4,
          std::to_string(nets) + " nets, worst relative error " + fmt(worst)};
}

SuiteResult collision_suite(int cases, std::uint64_t seed) {
  Rng rng(seed);
  const double r_min = 1.5;
  const ModelParams model = build_model(0.2);
  int events = 0;
  double max_tangency = 0.0;
  double worst_violation = -1e300;  // of g^T X >= c on feasible inputs
  int spurious = 0;

  for (int c = 0; c < cases; ++c) {
    // A previous-step prediction that flies past a center, sometimes inside
    // r_min, sometimes safely far.
    const int n_prev = 2 + rng.uniform_int(18);
    const bool near_pass = c % 4 != 0;
    const double offset = near_pass ? rng.uniform(0.05, 0.95 * r_min)
                                    : rng.uniform(1.05 * r_min, 4.0 * r_min);
    const Vec2 center{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    const Vec2 dir{std::cos(angle), std::sin(angle)};
    const Vec2 normal{-dir.y(), dir.x()};
    StackedTrajectory pred;
    pred.horizon = n_prev;
    pred.values.resize(2 * n_prev);
    const double t0 = rng.uniform(-3.0, 0.0);
    for (int k = 0; k < n_prev; ++k) {
      const Vec2 p = center + offset * normal + (t0 + 0.3 * k) * dir;
      pred.values.segment<2>(2 * k) = p;
    }

    const auto ev = detect_collision(pred, Obstacle{center}, r_min);
    if (!ev) {
      // far passes may legitimately miss; near passes may also stay outside
      // r_min at the sampled steps
      if (!near_pass) continue;
      const double closest = [&] {
        double d = 1e300;
        for (int k = 0; k < n_prev; ++k)
          d = std::min(d, (pred.block(k) - center).norm());
        return d;
      }();
      if (closest < r_min) ++spurious;  // missed a real violation
      continue;
    }
    ++events;
    max_tangency = std::max(max_tangency, oracles::tangency_gap(*ev, center, r_min));

    // The emitted row must imply the position half space for any input
    // sequence satisfying it (current horizon may differ from the previous).
    const int n_now = 1 + rng.uniform_int(kMaxHorizon);
    const PredictionMatrices pm = build_prediction_matrices(model, n_now);
    const RobotState x_meas{pred.block(0) + Vec2{rng.normal(), rng.normal()} * 0.1};
    const VecX g = embed_at_step(ev->direction, ev->step, n_now);
    const CollisionConstraint constraint = build_constraint(g, pm, x_meas, ev->bound);

    for (int trial = 0; trial < 5; ++trial) {
      VecX u(2 * n_now);
      for (int i = 0; i < 2 * n_now; ++i) u(i) = rng.uniform(-1.5, 1.5);
      const double lhs = constraint.row.dot(u);
      if (lhs > constraint.rhs) {
        u += constraint.row * ((constraint.rhs - lhs) / constraint.row.squaredNorm());
      }
      const VecX positions = pm.F * x_meas.position + pm.Phi * u;
      worst_violation = std::max(worst_violation, ev->bound - g.dot(positions));
    }
  }

  const bool ok = events > 0 && spurious == 0 && max_tangency <= 1e-9 &&
                  worst_violation <= 1e-9;
  return {"collision-half-space-invariants", ok,
          std::to_string(events) + " events, max tangency gap " +
              fmt(max_tangency) + ", worst half-space violation " +
              fmt(worst_violation)};
}

std::vector<SuiteResult> run_all() {
  return {
      prediction_suite(200, 11),
      qp_oracle_suite(100, 22),
      gradient_suite(20, 33),
      collision_suite(200, 44),
  };
}

}  // namespace vhmpc::selftest

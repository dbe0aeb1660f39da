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

#include "vhmpc/oracles.hpp"

#include <Eigen/LU>

#include <cmath>

namespace vhmpc::oracles {

StackedTrajectory sequential_rollout(const Mat2& A, const Mat2& B,
                                     const Vec2& x0,
                                     const StackedTrajectory& inputs) {
  StackedTrajectory out;
  out.horizon = inputs.horizon;
  out.values.resize(2 * inputs.horizon);
  Vec2 x = x0;
  for (int k = 0; k < inputs.horizon; ++k) {
    x = A * x + B * inputs.block(k);
    out.values.segment<2>(2 * k) = x;
  }
  return out;
}

std::optional<VecX> enumerate_qp(const QuadraticProgram& qp, double tol) {
  const auto n = qp.H.rows();
  const int m = static_cast<int>(qp.A.rows());
  std::optional<VecX> best;
  double best_obj = 0.0;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) active.push_back(i);
    }
    const int na = static_cast<int>(active.size());
    MatX K = MatX::Zero(n + na, n + na);
    K.topLeftCorner(n, n) = qp.H;
    VecX rhs(n + na);
    rhs.head(n) = -qp.f;
    for (int i = 0; i < na; ++i) {
      K.block(0, n + i, n, 1) = qp.A.row(active[i]).transpose();
      K.block(n + i, 0, 1, n) = qp.A.row(active[i]);
      rhs(n + i) = qp.b(active[i]);
    }
    Eigen::FullPivLU<MatX> lu(K);
    if (!lu.isInvertible()) continue;
    const VecX sol = lu.solve(rhs);
    const VecX u = sol.head(n);
    bool ok = u.allFinite();
    // dual feasibility on the active set
    for (int i = 0; ok && i < na; ++i) {
      if (sol(n + i) < -tol) ok = false;
    }
    // primal feasibility everywhere
    if (ok && m > 0) {
      const VecX slack = qp.A * u - qp.b;
      if (slack.maxCoeff() > tol) ok = false;
    }
    if (!ok) continue;
    const double obj = 0.5 * u.dot(qp.H * u) + qp.f.dot(u);
    if (!best || obj < best_obj) {
      best = u;
      best_obj = obj;
    }
  }
  return best;
}

nn::Gradients finite_difference_gradients(nn::Mlp& net,
                                          const std::function<double()>& eval,
                                          double step) {
  nn::Gradients g = nn::zero_gradients(net);
  for (int l = 0; l < net.layer_count(); ++l) {
    for (size_t i = 0; i < net.weights[l].size(); ++i) {
      double& p = net.weights[l].d[i];
      const double saved = p;
      p = saved + step;
      const double hi = eval();
      p = saved - step;
      const double lo = eval();
      p = saved;
      g.weights[l].d[i] = (hi - lo) / (2.0 * step);
    }
    for (size_t i = 0; i < net.biases[l].size(); ++i) {
      double& p = net.biases[l][i];
      const double saved = p;
      p = saved + step;
      const double hi = eval();
      p = saved - step;
      const double lo = eval();
      p = saved;
      g.biases[l][i] = (hi - lo) / (2.0 * step);
    }
  }
  return g;
}

double relative_gradient_error(const nn::Gradients& analytic,
                               const nn::Gradients& fd, double floor) {
  double diff2 = 0.0;
  double ref2 = 0.0;
  for (size_t l = 0; l < fd.weights.size(); ++l) {
    for (size_t i = 0; i < fd.weights[l].size(); ++i) {
      const double d = analytic.weights[l].d[i] - fd.weights[l].d[i];
      diff2 += d * d;
      ref2 += fd.weights[l].d[i] * fd.weights[l].d[i];
    }
    for (size_t i = 0; i < fd.biases[l].size(); ++i) {
      const double d = analytic.biases[l][i] - fd.biases[l][i];
      diff2 += d * d;
      ref2 += fd.biases[l][i] * fd.biases[l][i];
    }
  }
  return std::sqrt(diff2) / std::max(std::sqrt(ref2), floor);
}

double tangency_gap(const CollisionEvent& ev, const Vec2& other_center,
                    double r_min) {
  const Vec2 b = ev.direction;
  const double d2 = b.squaredNorm();
  if (d2 == 0.0) return std::numeric_limits<double>::infinity();
  // Boundary point of b^T x >= c on the line x(s) = center + s b.
  const double s = (ev.bound - b.dot(other_center)) / d2;
  const Vec2 boundary = other_center + s * b;
  return std::abs((boundary - other_center).norm() - r_min);
}

}  // namespace vhmpc::oracles

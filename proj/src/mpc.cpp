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

#include "vhmpc/mpc.hpp"

#include <algorithm>

namespace vhmpc {

void MpcConfig::validate() const {
  require(q_weight >= 0.0, "mpc: tracking weight must be nonnegative");
  require(w_weight > 0.0, "mpc: input weight must be positive");
  require(h > 0.0, "mpc: sampling time must be positive");
  require(lb < ub, "mpc: lower bound must be below upper bound");
  require(r_min > 0.0, "mpc: r_min must be positive");
}

std::pair<MatX, VecX> build_cost(const PredictionMatrices& pm,
                                 const RobotState& x_meas,
                                 const DesiredTrajectory& desired,
                                 const MpcConfig& cfg) {
  cfg.validate();
  const int dim = 2 * pm.horizon;
  require(pm.F.rows() == dim && pm.Phi.rows() == dim, "build_cost: bad matrices");

  MatX H = 2.0 * cfg.q_weight * (pm.Phi.transpose() * pm.Phi);
  H.diagonal().array() += 2.0 * cfg.w_weight;
  H = 0.5 * (H + H.transpose());  // exact symmetry

  const VecX x_d = desired.stacked(pm.horizon).values;
  const VecX f = -2.0 * cfg.q_weight *
                 (pm.Phi.transpose() * (x_d - pm.F * x_meas.position));
  return {std::move(H), f};
}

std::pair<MatX, VecX> assemble_inequalities(
    std::span<const CollisionConstraint> collision,
    const PredictionMatrices& pm, const MpcConfig& cfg) {
  cfg.validate();
  const int dim = 2 * pm.horizon;
  const int m_coll = static_cast<int>(collision.size());
  MatX A = MatX::Zero(m_coll + 2 * dim, dim);
  VecX b(m_coll + 2 * dim);
  for (int i = 0; i < m_coll; ++i) {
    require(collision[i].row.size() == dim,
            "assemble_inequalities: constraint row does not match horizon");
    A.row(i) = collision[i].row.transpose();
    b(i) = collision[i].rhs;
  }
  A.block(m_coll, 0, dim, dim) = -MatX::Identity(dim, dim);
  b.segment(m_coll, dim).setConstant(-cfg.lb);
  A.block(m_coll + dim, 0, dim, dim) = MatX::Identity(dim, dim);
  b.segment(m_coll + dim, dim).setConstant(cfg.ub);
  return {std::move(A), std::move(b)};
}

MpcStepResult mpc_step(const PredictionMatrices& pm, const RobotState& x_meas,
                       const DesiredTrajectory& desired,
                       std::span<const CollisionConstraint> collision,
                       const MpcConfig& cfg, const VecX* warm_start) {
  QuadraticProgram qp;
  std::tie(qp.H, qp.f) = build_cost(pm, x_meas, desired, cfg);
  std::tie(qp.A, qp.b) = assemble_inequalities(collision, pm, cfg);

  const VecX* warm =
      (warm_start && warm_start->size() == qp.H.rows()) ? warm_start : nullptr;
  QpSolution qsol = solve(qp, {}, warm);

  MpcStepResult res;
  res.collision_rows = static_cast<int>(collision.size());
  res.qp_status = qsol.status;

  if (qsol.status != QpStatus::kOptimal && !collision.empty()) {
    // Mutually exclusive half-spaces: re-solve with one penalized slack per
    // collision row so the robot still pushes toward separation as hard as
    // the input bounds allow.
    const int dim = 2 * pm.horizon;
    const int m_coll = static_cast<int>(collision.size());
    QuadraticProgram soft;
    soft.H = MatX::Zero(dim + m_coll, dim + m_coll);
    soft.H.topLeftCorner(dim, dim) = qp.H;
    soft.H.bottomRightCorner(m_coll, m_coll).diagonal().setConstant(
        2.0 * cfg.slack_penalty);
    soft.f = VecX::Zero(dim + m_coll);
    soft.f.head(dim) = qp.f;
    const int m_all = static_cast<int>(qp.A.rows());
    soft.A = MatX::Zero(m_all + m_coll, dim + m_coll);
    soft.A.topLeftCorner(m_all, dim) = qp.A;
    for (int i = 0; i < m_coll; ++i) {
      soft.A(i, dim + i) = -1.0;           // row * U - s_i <= rhs
      soft.A(m_all + i, dim + i) = -1.0;   // s_i >= 0
    }
    soft.b = VecX::Zero(m_all + m_coll);
    soft.b.head(m_all) = qp.b;
    QpSolution soft_sol = solve(soft, {}, nullptr);
    if (soft_sol.status == QpStatus::kOptimal) {
      qsol.u = soft_sol.u.head(dim);
      qsol.status = QpStatus::kOptimal;
    }
    res.used_fallback = true;
  }
  if (qsol.status != QpStatus::kOptimal) {
    // Last resort: respect the input box only.
    std::tie(qp.A, qp.b) = assemble_inequalities({}, pm, cfg);
    qsol = solve(qp, {}, warm);
    qsol.u = qsol.u.cwiseMax(cfg.lb).cwiseMin(cfg.ub);
    res.used_fallback = true;
  }

  res.input_sequence = qsol.u;
  res.u0.velocity = qsol.u.head<2>();
  res.predicted.horizon = pm.horizon;
  res.predicted.values = pm.F * x_meas.position + pm.Phi * qsol.u;
  return res;
}

}  // namespace vhmpc

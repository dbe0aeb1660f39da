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

#include "vhmpc/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <vector>

namespace vhmpc {

namespace {

void validate_problem(const QuadraticProgram& qp) {
  const auto n = qp.H.rows();
  require(n > 0 && qp.H.cols() == n, "qp: H must be square");
  require(qp.f.size() == n, "qp: f does not match H");
  const auto m = qp.A.rows();
  if (m > 0) {
    require(qp.A.cols() == n, "qp: A does not match H");
  }
  require(qp.b.size() == m, "qp: b does not match A");
  require(qp.H.allFinite() && qp.f.allFinite(), "qp: non-finite objective");
  require(m == 0 || (qp.A.allFinite() && qp.b.allFinite()),
          "qp: non-finite constraints");
  const double h_scale = std::max(1.0, qp.H.cwiseAbs().maxCoeff());
  require((qp.H - qp.H.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * h_scale,
          "qp: H must be symmetric");
  Eigen::LLT<MatX> llt(qp.H);
  require(llt.info() == Eigen::Success, "qp: H must be positive definite");
}

KktReport raw_kkt(const QuadraticProgram& qp, const VecX& u, const VecX& lambda) {
  KktReport r;
  r.stationarity = (qp.A.rows() > 0)
                       ? (qp.H * u + qp.f + qp.A.transpose() * lambda)
                             .cwiseAbs()
                             .maxCoeff()
                       : (qp.H * u + qp.f).cwiseAbs().maxCoeff();
  if (qp.A.rows() > 0) {
    const VecX slack = qp.A * u - qp.b;  // <= 0 when feasible
    r.primal = std::max(0.0, slack.maxCoeff());
    r.dual = std::max(0.0, -lambda.minCoeff());
    r.complementarity = (lambda.array() * slack.array()).abs().maxCoeff();
  }
  return r;
}

// Equality-constrained solve on a guessed active set, with one step of
// iterative refinement against the tiny regularization. Returns false when
// the resulting pair fails the KKT test.
bool try_polish(const QuadraticProgram& qp, const std::vector<int>& active,
                double tol, QpSolution* sol) {
  const auto n = qp.H.rows();
  const int na = static_cast<int>(active.size());
  VecX u;
  VecX lambda = VecX::Zero(qp.A.rows());
  if (na == 0) {
    u = Eigen::LLT<MatX>(qp.H).solve(-qp.f);
  } else {
    MatX K = MatX::Zero(n + na, n + na);
    K.topLeftCorner(n, n) = qp.H;
    MatX Ae(na, n);
    VecX be(na);
    for (int i = 0; i < na; ++i) {
      Ae.row(i) = qp.A.row(active[i]);
      be(i) = qp.b(active[i]);
    }
    K.topRightCorner(n, na) = Ae.transpose();
    K.bottomLeftCorner(na, n) = Ae;
    K.bottomRightCorner(na, na).diagonal().setConstant(-1e-9);
    Eigen::PartialPivLU<MatX> lu(K);
    VecX rhs(n + na);
    rhs.head(n) = -qp.f;
    rhs.tail(na) = be;
    VecX sol_vec = lu.solve(rhs);
    // one refinement step against the -1e-9 regularization
    VecX resid = rhs - K * sol_vec;
    sol_vec += lu.solve(resid);
    u = sol_vec.head(n);
    for (int i = 0; i < na; ++i) lambda(active[i]) = sol_vec(n + i);
  }
  if (!u.allFinite() || !lambda.allFinite()) return false;
  // Multipliers that came out slightly negative are inactive in truth;
  // clamp the noise, reject real violations via the KKT test below.
  for (int i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < 0.0 && lambda(i) > -tol) lambda(i) = 0.0;
  }
  const KktReport rep = raw_kkt(qp, u, lambda);
  if (!(rep.primal <= tol && rep.dual <= tol && rep.stationarity <= tol &&
        rep.complementarity <= tol)) {
    return false;
  }
  sol->u = u;
  sol->dual = lambda;
  sol->primal_residual = rep.primal;
  sol->dual_residual = rep.stationarity;
  sol->polished = true;
  return true;
}

}  // namespace

KktReport kkt_check(const QuadraticProgram& qp, const VecX& u,
                    const VecX& lambda, double tol) {
  require(u.size() == qp.H.rows(), "kkt_check: u does not match H");
  require(lambda.size() == qp.A.rows(), "kkt_check: lambda does not match A");
  KktReport r = raw_kkt(qp, u, lambda);
  r.ok = r.primal <= tol && r.dual <= tol && r.stationarity <= tol &&
         r.complementarity <= tol;
  return r;
}

QpSolution solve(const QuadraticProgram& qp, const QpSettings& settings,
                 const VecX* warm_primal, const VecX* warm_dual) {
  validate_problem(qp);
  require(settings.tol > 0.0, "qp: tolerance must be positive");

  const auto n = qp.H.rows();
  const auto m = qp.A.rows();
  QpSolution sol;
  sol.dual = VecX::Zero(m);

  if (m == 0) {
    sol.u = Eigen::LLT<MatX>(qp.H).solve(-qp.f);
    sol.status = QpStatus::kOptimal;
    sol.dual_residual = (qp.H * sol.u + qp.f).cwiseAbs().maxCoeff();
    return sol;
  }

  double rho = settings.rho;
  const double sigma = settings.sigma;
  const double alpha = settings.over_relaxation;

  auto factor = [&](double rho_now) {
    MatX K(n + m, n + m);
    K.topLeftCorner(n, n) = qp.H;
    K.topLeftCorner(n, n).diagonal().array() += sigma;
    K.topRightCorner(n, m) = qp.A.transpose();
    K.bottomLeftCorner(m, n) = qp.A;
    K.bottomRightCorner(m, m).setZero();
    K.bottomRightCorner(m, m).diagonal().setConstant(-1.0 / rho_now);
    return Eigen::PartialPivLU<MatX>(K);
  };
  Eigen::PartialPivLU<MatX> kkt = factor(rho);

  VecX x = warm_primal && warm_primal->size() == n ? *warm_primal : VecX::Zero(n);
  VecX y = VecX::Zero(m);
  if (warm_dual && warm_dual->size() == m) y = warm_dual->cwiseMax(0.0);
  VecX z = (qp.A * x).cwiseMin(qp.b);

  double tighten = 1.0;  // shrinks if loose convergence fails the KKT gate
  VecX rhs(n + m), p(n + m);

  for (int it = 1; it <= settings.max_iter; ++it) {
    rhs.head(n) = sigma * x - qp.f;
    rhs.tail(m) = z - y / rho;
    p = kkt.solve(rhs);
    const VecX z_tilde = z + (p.tail(m) - y) / rho;

    const VecX x_next = alpha * p.head(n) + (1.0 - alpha) * x;
    const VecX w = alpha * z_tilde + (1.0 - alpha) * z + y / rho;
    const VecX z_next = w.cwiseMin(qp.b);
    const VecX y_next = rho * (w - z_next);

    const VecX dy = y_next - y;
    x = x_next;
    z = z_next;
    y = y_next;
    sol.iterations = it;

    const bool checkpoint =
        (it % settings.check_interval == 0) || it == settings.max_iter;
    if (!checkpoint) continue;

    const double r_prim = (qp.A * x - z).cwiseAbs().maxCoeff();
    const double r_dual = (qp.H * x + qp.f + qp.A.transpose() * y)
                              .cwiseAbs()
                              .maxCoeff();
    sol.primal_residual = r_prim;
    sol.dual_residual = r_dual;

    // Primal infeasibility certificate (Farkas direction in the duals).
    const double dy_norm = dy.cwiseAbs().maxCoeff();
    if (dy_norm > 1e-14) {
      const double eps = settings.eps_infeasible * dy_norm;
      const bool atdy_small =
          (qp.A.transpose() * dy).cwiseAbs().maxCoeff() <= eps;
      const bool dy_nonneg = dy.minCoeff() >= -eps;
      const bool support_neg = qp.b.dot(dy.cwiseMax(0.0)) <= -eps;
      if (atdy_small && dy_nonneg && support_neg) {
        sol.u = x;
        sol.status = QpStatus::kInfeasible;
        return sol;
      }
    }

    // Loose relative trigger; the polish step below supplies the absolute
    // accuracy demanded by settings.tol.
    const double scale_p =
        std::max({(qp.A * x).cwiseAbs().maxCoeff(), z.cwiseAbs().maxCoeff(), 1.0});
    const double scale_d = std::max({(qp.H * x).cwiseAbs().maxCoeff(),
                                     (qp.A.transpose() * y).cwiseAbs().maxCoeff(),
                                     qp.f.cwiseAbs().maxCoeff(), 1.0});
    const double trig_p = tighten * (0.5 * settings.tol + 1e-5 * scale_p);
    const double trig_d = tighten * (0.5 * settings.tol + 1e-5 * scale_d);
    if (r_prim <= trig_p && r_dual <= trig_d) {
      // Inactive rows carry exactly zero dual here (projection residual), so
      // the sign of y identifies the active set.
      std::vector<int> active;
      for (int i = 0; i < m; ++i) {
        if (y(i) > 0.0) active.push_back(i);
      }
      if (try_polish(qp, active, settings.tol, &sol)) {
        sol.status = QpStatus::kOptimal;
        return sol;
      }
      // Polish can fail on a misidentified set; retry without the rows whose
      // multipliers came out negative by re-running at a tighter target.
      const KktReport raw = raw_kkt(qp, x, y);
      if (raw.primal <= settings.tol && raw.dual <= settings.tol &&
          raw.stationarity <= settings.tol &&
          raw.complementarity <= settings.tol) {
        sol.u = x;
        sol.dual = y;
        sol.status = QpStatus::kOptimal;
        return sol;
      }
      tighten *= 0.1;
      if (tighten < 1e-8) tighten = 1e-8;
    }

    if (it % settings.rho_update_interval == 0) {
      const double r_prim_rel = std::max(r_prim / scale_p, 1e-12);
      const double r_dual_rel = std::max(r_dual / scale_d, 1e-12);
      const double rho_new =
          std::clamp(rho * std::sqrt(r_prim_rel / r_dual_rel), 1e-6, 1e6);
      if (rho_new > 5.0 * rho || rho_new < rho / 5.0) {
        rho = rho_new;
        kkt = factor(rho);
      }
    }
  }

  // Last-chance polish from wherever the iteration stopped.
  std::vector<int> active;
  for (int i = 0; i < m; ++i) {
    if (y(i) > 0.0) active.push_back(i);
  }
  if (try_polish(qp, active, settings.tol, &sol)) {
    sol.status = QpStatus::kOptimal;
    return sol;
  }
  sol.u = x;
  sol.dual = y;
  sol.status = QpStatus::kMaxIterations;
  return sol;
}

}  // namespace vhmpc

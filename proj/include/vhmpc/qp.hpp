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

// Strictly convex quadratic program
//   min_u  0.5 u^T H u + f^T u   s.t.  A u <= b
// with H symmetric positive definite and m >= 0 inequality rows.
struct QuadraticProgram {
  MatX H;
  VecX f;
  MatX A;  // m x n (may be 0 x n)
  VecX b;  // m
};

enum class QpStatus { kOptimal, kInfeasible, kMaxIterations };

struct QpSolution {
  VecX u;
  VecX dual;  // multipliers for A u <= b, nonnegative at optimality
  QpStatus status = QpStatus::kMaxIterations;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool polished = false;
};

struct QpSettings {
  double tol = 1e-6;
  int max_iter = 4000;
  // ADMM internals: step size, regularization, over-relaxation factor,
  // residual check cadence and infeasibility certificate tolerance.
  double rho = 0.1;
  double sigma = 1e-6;
  double over_relaxation = 1.6;
  int check_interval = 5;
  int rho_update_interval = 50;
  double eps_infeasible = 1e-6;
};

// Solves the QP by over-relaxed operator splitting on the KKT system with
// periodic residual checks and an active-set polish step. status == kOptimal
// guarantees every KKT residual (primal, dual, stationarity, complementary
// slackness) is within settings.tol.
QpSolution solve(const QuadraticProgram& qp, const QpSettings& settings = {},
                 const VecX* warm_primal = nullptr,
                 const VecX* warm_dual = nullptr);

struct KktReport {
  double primal = 0.0;          // max(0, max_i (Au - b)_i)
  double dual = 0.0;            // max(0, -min_i lambda_i)
  double stationarity = 0.0;    // ||H u + f + A^T lambda||_inf
  double complementarity = 0.0; // max_i |lambda_i (Au - b)_i|
  bool ok = false;
};

KktReport kkt_check(const QuadraticProgram& qp, const VecX& u,
                    const VecX& lambda, double tol);

}  // namespace vhmpc

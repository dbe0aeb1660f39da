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

#include <functional>
#include <optional>

#include "vhmpc/collision.hpp"
#include "vhmpc/nn.hpp"
#include "vhmpc/prediction.hpp"
#include "vhmpc/qp.hpp"

// Slow reference implementations, deliberately independent of the code paths
// they verify. Shared by the unit tests, the acceptance suite and the CLI
// self test.
namespace vhmpc::oracles {

// Applies x[k+1] = A x[k] + B u[k] one step at a time.
StackedTrajectory sequential_rollout(const Mat2& A, const Mat2& B,
                                     const Vec2& x0,
                                     const StackedTrajectory& inputs);

// Tries every subset of constraints as the active set, solves the
// equality-constrained system and returns the unique feasible KKT point.
// nullopt when no subset yields one (infeasible problem).
std::optional<VecX> enumerate_qp(const QuadraticProgram& qp, double tol = 1e-7);

// Central finite differences of an arbitrary scalar function over every
// parameter of the net. The evaluation callback must depend on the net's
// current parameters; they are perturbed in place and restored.
nn::Gradients finite_difference_gradients(nn::Mlp& net,
                                          const std::function<double()>& eval,
                                          double step = 1e-5);

// ||analytic - fd||_2 / max(||fd||_2, floor)
double relative_gradient_error(const nn::Gradients& analytic,
                               const nn::Gradients& fd, double floor = 1e-12);

// Distance mismatch of the half-space boundary point along the line from the
// avoided center through the predicted collision point: zero means the
// linearization touches the r_min circle exactly.
double tangency_gap(const CollisionEvent& ev, const Vec2& other_center,
                    double r_min);

}  // namespace vhmpc::oracles

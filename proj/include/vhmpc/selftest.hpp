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

#include <cstdint>
#include <string>
#include <vector>

namespace vhmpc::selftest {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Stacked propagation against a step-by-step rollout (1e-12 absolute).
SuiteResult prediction_suite(int cases, std::uint64_t seed);

// QP solver against brute-force active-set enumeration (1e-6) with a KKT
// residual gate.
SuiteResult qp_oracle_suite(int cases, std::uint64_t seed);

// Analytic gradients against central finite differences (1e-4 relative).
SuiteResult gradient_suite(int nets, std::uint64_t seed);

// Emitted half spaces: algebraic identity on feasible inputs plus exact
// tangency of the linearization (1e-9).
SuiteResult collision_suite(int cases, std::uint64_t seed);

// All four at self-test sizes.
std::vector<SuiteResult> run_all();

}  // namespace vhmpc::selftest

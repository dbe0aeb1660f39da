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

#include <exception>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vhmpc::parallel {

// Process-wide thread budget for the OpenMP lanes. 1 means serial execution.
// Results are identical for any thread count: every parallel loop in this
// project assigns whole output elements to threads and keeps a fixed
// accumulation order within each element.
void set_max_threads(int n);
int max_threads();
bool enabled();

// Runs f(i) for i in [0, n). Exceptions thrown by f are captured and the
// first one (by index) is rethrown after all iterations complete.
template <typename F>
void for_each_index(int n, F&& f) {
  if (n <= 0) return;
#ifdef _OPENMP
  if (enabled() && n > 1) {
    std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int i = 0; i < n; ++i) {
      try {
        f(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return;
  }
#endif
  for (int i = 0; i < n; ++i) f(i);
}

}  // namespace vhmpc::parallel

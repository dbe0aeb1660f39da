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

#include "vhmpc/parallel.hpp"

#include <atomic>

namespace vhmpc::parallel {

namespace {
std::atomic<int> g_max_threads{
#ifdef _OPENMP
    0  // 0 = use omp_get_max_threads() at call time
#else
    1
#endif
};
}  // namespace

void set_max_threads(int n) { g_max_threads.store(n < 1 ? 1 : n); }

int max_threads() {
  int n = g_max_threads.load();
#ifdef _OPENMP
  if (n == 0) n = omp_get_max_threads();
#endif
  return n < 1 ? 1 : n;
}

bool enabled() {
#ifdef _OPENMP
  return max_threads() > 1;
#else
  return false;
#endif
}

}  // namespace vhmpc::parallel

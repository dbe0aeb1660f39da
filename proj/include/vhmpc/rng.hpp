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

#include <cmath>
#include <cstdint>
#include <random>

namespace vhmpc {

// Seeded RNG with fully specified mappings so that streams are reproducible
// across standard library implementations (std distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_mix_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1].
  double uniform_pos() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
  }

  // Standard normal via Box-Muller; second value cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  // Derives an independent stream (splitmix64 over seed and stream id).
  Rng fork(std::uint64_t stream) const {
    std::uint64_t z = seed_mix_ + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_mix_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace vhmpc

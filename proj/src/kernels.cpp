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

#include "vhmpc/kernels.hpp"

#include <algorithm>

#include "vhmpc/parallel.hpp"

namespace vhmpc::kernels {

namespace {

// Eight-lane dot product. The lane split is a fixed function of n, so the
// rounding pattern is identical no matter which thread computes it, and the
// independent accumulator chains pack into vector registers.
inline double dot8(const double* a, const double* b, int n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  double s4 = 0.0, s5 = 0.0, s6 = 0.0, s7 = 0.0;
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return (((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))) + tail;
}

}  // namespace

void linear_forward(const double* x, const double* w, const double* bias,
                    double* y, int batch, int in, int out) {
  const bool par = parallel::enabled();
  const int nt = parallel::max_threads();
  (void)par;
  (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) collapse(2) if (par) num_threads(nt)
#endif
  for (int b = 0; b < batch; ++b) {
    for (int o = 0; o < out; ++o) {
      y[static_cast<std::size_t>(b) * out + o] =
          bias[o] + dot8(x + static_cast<std::size_t>(b) * in,
                         w + static_cast<std::size_t>(o) * in, in);
    }
  }
}

void linear_backward_input(const double* dy, const double* w, double* dx,
                           int batch, int in, int out) {
  const bool par = parallel::enabled();
  const int nt = parallel::max_threads();
  (void)par;
  (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par) num_threads(nt)
#endif
  for (int b = 0; b < batch; ++b) {
    double* dxb = dx + static_cast<std::size_t>(b) * in;
    for (int i = 0; i < in; ++i) dxb[i] = 0.0;
    const double* dyb = dy + static_cast<std::size_t>(b) * out;
    for (int o = 0; o < out; ++o) {
      const double c = dyb[o];
      const double* wo = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) dxb[i] += c * wo[i];
    }
  }
}

void linear_grad_weights(const double* dy, const double* x, double* dw,
                         int batch, int in, int out) {
  const bool par = parallel::enabled();
  const int nt = parallel::max_threads();
  (void)par;
  (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par) num_threads(nt)
#endif
  for (int o = 0; o < out; ++o) {
    double* dwo = dw + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) dwo[i] = 0.0;
    for (int b = 0; b < batch; ++b) {
      const double c = dy[static_cast<std::size_t>(b) * out + o];
      const double* xb = x + static_cast<std::size_t>(b) * in;
      for (int i = 0; i < in; ++i) dwo[i] += c * xb[i];
    }
  }
}

void linear_grad_bias(const double* dy, double* db, int batch, int out) {
  const bool par = parallel::enabled();
  const int nt = parallel::max_threads();
  (void)par;
  (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par) num_threads(nt)
#endif
  for (int o = 0; o < out; ++o) {
    double s = 0.0;
    for (int b = 0; b < batch; ++b) s += dy[static_cast<std::size_t>(b) * out + o];
    db[o] = s;
  }
}

void relu_forward(const double* z, double* a, std::size_t n) {
  const bool par = parallel::enabled() && n > 4096;
  const int nt = parallel::max_threads();
  (void)par;
  (void)nt;
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par) num_threads(nt)
#endif
  for (std::ptrdiff_t i = 0; i < sn; ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void relu_backward(const double* z, const double* dy, double* dx,
                   std::size_t n) {
  const bool par = parallel::enabled() && n > 4096;
  const int nt = parallel::max_threads();
  (void)par;
  (void)nt;
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par) num_threads(nt)
#endif
  for (std::ptrdiff_t i = 0; i < sn; ++i) dx[i] = z[i] > 0.0 ? dy[i] : 0.0;
}

namespace reference {

void linear_forward(const double* x, const double* w, const double* bias,
                    double* y, int batch, int in, int out) {
  for (int b = 0; b < batch; ++b) {
    for (int o = 0; o < out; ++o) {
      double s = bias[o];
      for (int i = 0; i < in; ++i) {
        s += x[static_cast<std::size_t>(b) * in + i] *
             w[static_cast<std::size_t>(o) * in + i];
      }
      y[static_cast<std::size_t>(b) * out + o] = s;
    }
  }
}

void linear_backward_input(const double* dy, const double* w, double* dx,
                           int batch, int in, int out) {
  for (int b = 0; b < batch; ++b) {
    for (int i = 0; i < in; ++i) {
      double s = 0.0;
      for (int o = 0; o < out; ++o) {
        s += dy[static_cast<std::size_t>(b) * out + o] *
             w[static_cast<std::size_t>(o) * in + i];
      }
      dx[static_cast<std::size_t>(b) * in + i] = s;
    }
  }
}

void linear_grad_weights(const double* dy, const double* x, double* dw,
                         int batch, int in, int out) {
  for (int o = 0; o < out; ++o) {
    for (int i = 0; i < in; ++i) {
      double s = 0.0;
      for (int b = 0; b < batch; ++b) {
        s += dy[static_cast<std::size_t>(b) * out + o] *
             x[static_cast<std::size_t>(b) * in + i];
      }
      dw[static_cast<std::size_t>(o) * in + i] = s;
    }
  }
}

void linear_grad_bias(const double* dy, double* db, int batch, int out) {
  for (int o = 0; o < out; ++o) {
    double s = 0.0;
    for (int b = 0; b < batch; ++b) s += dy[static_cast<std::size_t>(b) * out + o];
    db[o] = s;
  }
}

void relu_forward(const double* z, double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void relu_backward(const double* z, const double* dy, double* dx,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = z[i] > 0.0 ? dy[i] : 0.0;
}

}  // namespace reference

}  // namespace vhmpc::kernels

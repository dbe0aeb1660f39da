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

#include <cstddef>

namespace vhmpc::kernels {

// Batched dense-layer kernels over row-major buffers:
//   x    batch x in      activations
//   w    out x in        weights
//   bias out
//   y/dy batch x out
//
// The default kernels are OpenMP-parallel over whole output elements with a
// fixed accumulation order inside each element, so their results do not
// depend on the thread count. kernels::reference holds the plain serial
// loops used by the tests and the benchmark.

// y = x * w^T + bias
void linear_forward(const double* x, const double* w, const double* bias,
                    double* y, int batch, int in, int out);

// dx = dy * w
void linear_backward_input(const double* dy, const double* w, double* dx,
                           int batch, int in, int out);

// dw = dy^T * x   (overwrites dw)
void linear_grad_weights(const double* dy, const double* x, double* dw,
                         int batch, int in, int out);

// db[o] = sum_b dy[b][o]   (overwrites db)
void linear_grad_bias(const double* dy, double* db, int batch, int out);

// a = max(z, 0)
void relu_forward(const double* z, double* a, std::size_t n);

// dx = dy where z > 0, else 0  (subgradient at 0 is 0)
void relu_backward(const double* z, const double* dy, double* dx,
                   std::size_t n);

namespace reference {

void linear_forward(const double* x, const double* w, const double* bias,
                    double* y, int batch, int in, int out);
void linear_backward_input(const double* dy, const double* w, double* dx,
                           int batch, int in, int out);
void linear_grad_weights(const double* dy, const double* x, double* dw,
                         int batch, int in, int out);
void linear_grad_bias(const double* dy, double* db, int batch, int out);
void relu_forward(const double* z, double* a, std::size_t n);
void relu_backward(const double* z, const double* dy, double* dx,
                   std::size_t n);

}  // namespace reference

}  // namespace vhmpc::kernels

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
#include <iosfwd>
#include <string>
#include <vector>

#include "vhmpc/rng.hpp"

namespace vhmpc::nn {

// Row-major dense matrix backing the batched layer kernels.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return d[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return d[static_cast<size_t>(r) * cols + c]; }
  double* row_ptr(int r) { return d.data() + static_cast<size_t>(r) * cols; }
  const double* row_ptr(int r) const { return d.data() + static_cast<size_t>(r) * cols; }
  size_t size() const { return d.size(); }
};

// Fully connected net: ReLU on hidden layers, identity on the output layer.
// weights[l] is out x in for layer l.
struct Mlp {
  std::vector<Mat> weights;
  std::vector<std::vector<double>> biases;

  int layer_count() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return weights.empty() ? 0 : weights.front().cols; }
  int output_dim() const { return weights.empty() ? 0 : weights.back().rows; }
  size_t param_count() const;
  bool all_finite() const;
};

// He-initialized MLP over the given layer widths (dims.size() >= 2). The
// final layer's weights are multiplied by final_layer_scale.
Mlp make_mlp(const std::vector<int>& dims, Rng& rng, double final_layer_scale = 1.0);

struct ForwardCache {
  Mat input;
  std::vector<Mat> pre;   // pre-activations per layer
  std::vector<Mat> post;  // post-activations per hidden layer
};

// Batched forward pass; x is batch x input_dim. Fills cache when given.
Mat forward(const Mlp& net, const Mat& x, ForwardCache* cache = nullptr);

// Single-vector convenience wrapper.
std::vector<double> forward(const Mlp& net, const std::vector<double>& x,
                            ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Mat> weights;
  std::vector<std::vector<double>> biases;

  void scale(double s);
};

Gradients zero_gradients(const Mlp& net);

// Reverse-mode pass from d(loss)/d(output). Overwrites grads and returns
// d(loss)/d(input) (batch x input_dim). The cache must come from a forward
// call on this net with the same batch.
Mat backward(const Mlp& net, const ForwardCache& cache, const Mat& grad_out,
             Gradients& grads);

// Input gradient only; skips the parameter gradients.
Mat backward_input_only(const Mlp& net, const ForwardCache& cache,
                        const Mat& grad_out);

struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<Mat> m_w, v_w;
  std::vector<std::vector<double>> m_b, v_b;
};

AdamState make_adam(const Mlp& net, double lr = 3e-4);

// Bias-corrected Adam update in place.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

// Scalar-parameter variant (temperature tuning).
struct AdamScalar {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  double m = 0.0;
  double v = 0.0;
};

void adam_step_scalar(double& param, double grad, AdamScalar& state);

// Versioned binary checkpoint: magic "VHMPC-NN", version u32, layer count
// u32, then per layer rows u32, cols u32, row-major little-endian f64
// weights followed by the f64 biases. Round-trips bit-exactly.
void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);
void save_mlp_file(const std::string& path, const Mlp& net);
Mlp load_mlp_file(const std::string& path);

// Optimizer-state blocks used inside bundled agent checkpoints.
void save_adam(std::ostream& out, const AdamState& state);
AdamState load_adam(std::istream& in);

}  // namespace vhmpc::nn

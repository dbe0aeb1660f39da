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

#include "vhmpc/nn.hpp"

#include <bit>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "vhmpc/kernels.hpp"

namespace vhmpc::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

void check(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

size_t Mlp::param_count() const {
  size_t n = 0;
  for (int l = 0; l < layer_count(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

bool Mlp::all_finite() const {
  for (int l = 0; l < layer_count(); ++l) {
    for (double v : weights[l].d)
      if (!std::isfinite(v)) return false;
    for (double v : biases[l])
      if (!std::isfinite(v)) return false;
  }
  return true;
}

Mlp make_mlp(const std::vector<int>& dims, Rng& rng, double final_layer_scale) {
  check(dims.size() >= 2, "make_mlp: need at least input and output dims");
  Mlp net;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    check(in > 0 && out > 0, "make_mlp: dims must be positive");
    Mat w(out, in);
    const double scale = std::sqrt(2.0 / in) *
                         (l + 2 == dims.size() ? final_layer_scale : 1.0);
    for (double& v : w.d) v = scale * rng.normal();
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(out, 0.0);
  }
  return net;
}

Mat forward(const Mlp& net, const Mat& x, ForwardCache* cache) {
  check(net.layer_count() > 0, "forward: empty net");
  check(x.cols == net.input_dim(), "forward: input width mismatch");
  const int batch = x.rows;
  if (cache) {
    cache->input = x;
    cache->pre.assign(net.layer_count(), Mat{});
    cache->post.assign(net.layer_count() > 0 ? net.layer_count() - 1 : 0, Mat{});
  }
  Mat cur = x;
  for (int l = 0; l < net.layer_count(); ++l) {
    const Mat& w = net.weights[l];
    Mat z(batch, w.rows);
    kernels::linear_forward(cur.d.data(), w.d.data(), net.biases[l].data(),
                            z.d.data(), batch, w.cols, w.rows);
    if (cache) cache->pre[l] = z;
    if (l + 1 < net.layer_count()) {
      Mat a(batch, w.rows);
      kernels::relu_forward(z.d.data(), a.d.data(), z.size());
      if (cache) cache->post[l] = a;
      cur = std::move(a);
    } else {
      cur = std::move(z);
    }
  }
  return cur;
}

std::vector<double> forward(const Mlp& net, const std::vector<double>& x,
                            ForwardCache* cache) {
  Mat xm(1, static_cast<int>(x.size()));
  xm.d = x;
  Mat y = forward(net, xm, cache);
  return y.d;
}

void Gradients::scale(double s) {
  for (auto& w : weights)
    for (double& v : w.d) v *= s;
  for (auto& b : biases)
    for (double& v : b) v *= s;
}

Gradients zero_gradients(const Mlp& net) {
  Gradients g;
  for (int l = 0; l < net.layer_count(); ++l) {
    g.weights.emplace_back(net.weights[l].rows, net.weights[l].cols);
    g.biases.emplace_back(net.biases[l].size(), 0.0);
  }
  return g;
}

Mat backward(const Mlp& net, const ForwardCache& cache, const Mat& grad_out,
             Gradients& grads) {
  const int layers = net.layer_count();
  check(static_cast<int>(cache.pre.size()) == layers,
        "backward: cache does not match net");
  check(grad_out.cols == net.output_dim() && grad_out.rows == cache.input.rows,
        "backward: output gradient shape mismatch");
  if (static_cast<int>(grads.weights.size()) != layers) grads = zero_gradients(net);

  const int batch = grad_out.rows;
  Mat delta = grad_out;  // gradient w.r.t. layer pre-activation
  for (int l = layers - 1; l >= 0; --l) {
    const Mat& w = net.weights[l];
    const Mat& layer_in = (l == 0) ? cache.input : cache.post[l - 1];
    check(layer_in.rows == batch && layer_in.cols == w.cols,
          "backward: stale cache");
    kernels::linear_grad_weights(delta.d.data(), layer_in.d.data(),
                                 grads.weights[l].d.data(), batch, w.cols,
                                 w.rows);
    kernels::linear_grad_bias(delta.d.data(), grads.biases[l].data(), batch,
                              w.rows);
    Mat dx(batch, w.cols);
    kernels::linear_backward_input(delta.d.data(), w.d.data(), dx.d.data(),
                                   batch, w.cols, w.rows);
    if (l > 0) {
      Mat masked(batch, w.cols);
      kernels::relu_backward(cache.pre[l - 1].d.data(), dx.d.data(),
                             masked.d.data(), dx.size());
      delta = std::move(masked);
    } else {
      delta = std::move(dx);
    }
  }
  return delta;
}

Mat backward_input_only(const Mlp& net, const ForwardCache& cache,
                        const Mat& grad_out) {
  const int layers = net.layer_count();
  check(static_cast<int>(cache.pre.size()) == layers,
        "backward: cache does not match net");
  check(grad_out.cols == net.output_dim() && grad_out.rows == cache.input.rows,
        "backward: output gradient shape mismatch");
  const int batch = grad_out.rows;
  Mat delta = grad_out;
  for (int l = layers - 1; l >= 0; --l) {
    const Mat& w = net.weights[l];
    Mat dx(batch, w.cols);
    kernels::linear_backward_input(delta.d.data(), w.d.data(), dx.d.data(),
                                   batch, w.cols, w.rows);
    if (l > 0) {
      Mat masked(batch, w.cols);
      kernels::relu_backward(cache.pre[l - 1].d.data(), dx.d.data(),
                             masked.d.data(), dx.size());
      delta = std::move(masked);
    } else {
      delta = std::move(dx);
    }
  }
  return delta;
}

AdamState make_adam(const Mlp& net, double lr) {
  AdamState s;
  s.lr = lr;
  for (int l = 0; l < net.layer_count(); ++l) {
    s.m_w.emplace_back(net.weights[l].rows, net.weights[l].cols);
    s.v_w.emplace_back(net.weights[l].rows, net.weights[l].cols);
    s.m_b.emplace_back(net.biases[l].size(), 0.0);
    s.v_b.emplace_back(net.biases[l].size(), 0.0);
  }
  return s;
}

namespace {

inline void adam_update(double* p, const double* g, double* m, double* v,
                        size_t n, double lr, double b1, double b2, double eps,
                        double corr1, double corr2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double m_hat = m[i] / corr1;
    const double v_hat = v[i] / corr2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  check(static_cast<int>(grads.weights.size()) == net.layer_count(),
        "adam_step: gradient shape mismatch");
  state.step += 1;
  const double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (int l = 0; l < net.layer_count(); ++l) {
    check(grads.weights[l].rows == net.weights[l].rows &&
              grads.weights[l].cols == net.weights[l].cols,
          "adam_step: gradient shape mismatch");
    adam_update(net.weights[l].d.data(), grads.weights[l].d.data(),
                state.m_w[l].d.data(), state.v_w[l].d.data(),
                net.weights[l].size(), state.lr, state.beta1, state.beta2,
                state.eps, corr1, corr2);
    adam_update(net.biases[l].data(), grads.biases[l].data(),
                state.m_b[l].data(), state.v_b[l].data(), net.biases[l].size(),
                state.lr, state.beta1, state.beta2, state.eps, corr1, corr2);
  }
  assert(net.all_finite());
}

void adam_step_scalar(double& param, double grad, AdamScalar& state) {
  state.step += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad;
  const double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  param -= state.lr * (state.m / corr1) / (std::sqrt(state.v / corr2) + state.eps);
}

namespace {

constexpr char kMagic[8] = {'V', 'H', 'M', 'P', 'C', '-', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f64s(std::ostream& out, const double* p, size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("checkpoint: truncated stream");
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("checkpoint: truncated stream");
  return v;
}

void read_f64s(std::istream& in, double* p, size_t n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated stream");
}

}  // namespace

void save_mlp(std::ostream& out, const Mlp& net) {
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(net.layer_count()));
  for (int l = 0; l < net.layer_count(); ++l) {
    const Mat& w = net.weights[l];
    write_u32(out, static_cast<std::uint32_t>(w.rows));
    write_u32(out, static_cast<std::uint32_t>(w.cols));
    write_f64s(out, w.d.data(), w.size());
    write_f64s(out, net.biases[l].data(), net.biases[l].size());
  }
}

Mlp load_mlp(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version");
  const std::uint32_t layers = read_u32(in);
  if (layers == 0 || layers > 64) throw std::runtime_error("checkpoint: bad layer count");
  Mlp net;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const std::uint32_t rows = read_u32(in);
    const std::uint32_t cols = read_u32(in);
    if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20))
      throw std::runtime_error("checkpoint: bad layer shape");
    Mat w(static_cast<int>(rows), static_cast<int>(cols));
    read_f64s(in, w.d.data(), w.size());
    std::vector<double> b(rows, 0.0);
    read_f64s(in, b.data(), b.size());
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

void save_mlp_file(const std::string& path, const Mlp& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
  save_mlp(out, net);
}

Mlp load_mlp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  return load_mlp(in);
}

void save_adam(std::ostream& out, const AdamState& state) {
  write_u64(out, state.step);
  write_f64s(out, &state.lr, 1);
  write_u32(out, static_cast<std::uint32_t>(state.m_w.size()));
  for (size_t l = 0; l < state.m_w.size(); ++l) {
    write_u32(out, static_cast<std::uint32_t>(state.m_w[l].rows));
    write_u32(out, static_cast<std::uint32_t>(state.m_w[l].cols));
    write_f64s(out, state.m_w[l].d.data(), state.m_w[l].size());
    write_f64s(out, state.v_w[l].d.data(), state.v_w[l].size());
    write_f64s(out, state.m_b[l].data(), state.m_b[l].size());
    write_f64s(out, state.v_b[l].data(), state.v_b[l].size());
  }
}

AdamState load_adam(std::istream& in) {
  AdamState s;
  s.step = read_u64(in);
  read_f64s(in, &s.lr, 1);
  const std::uint32_t layers = read_u32(in);
  for (std::uint32_t l = 0; l < layers; ++l) {
    const int rows = static_cast<int>(read_u32(in));
    const int cols = static_cast<int>(read_u32(in));
    Mat m(rows, cols), v(rows, cols);
    read_f64s(in, m.d.data(), m.size());
    read_f64s(in, v.d.data(), v.size());
    std::vector<double> mb(rows, 0.0), vb(rows, 0.0);
    read_f64s(in, mb.data(), mb.size());
    read_f64s(in, vb.data(), vb.size());
    s.m_w.push_back(std::move(m));
    s.v_w.push_back(std::move(v));
    s.m_b.push_back(std::move(mb));
    s.v_b.push_back(std::move(vb));
  }
  return s;
}

}  // namespace vhmpc::nn

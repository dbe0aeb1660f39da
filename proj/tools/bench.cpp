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

// Benchmarks the OpenMP lanes against their serial counterparts:
//   1. batched dense-layer kernels (optimized vs naive reference, 1 vs N threads)
//   2. whole multi-robot episodes (per-robot solves serial vs parallel)
// and verifies that thread count does not change any result bit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vhmpc/kernels.hpp"
#include "vhmpc/nn.hpp"
#include "vhmpc/parallel.hpp"
#include "vhmpc/rng.hpp"
#include "vhmpc/scenario_io.hpp"
#include "vhmpc/sim.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double time_loop(int repeats, const std::function<void()>& fn) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  return seconds_since(t0) / repeats;
}

void bench_kernels(int batch, int hidden, int threads, int repeats) {
  using namespace vhmpc;
  Rng rng(7);
  const int in = 32, out = hidden;
  nn::Mat x(batch, in), w(out, in), dy(batch, out);
  std::vector<double> bias(out);
  for (double& v : x.d) v = rng.normal();
  for (double& v : w.d) v = rng.normal();
  for (double& v : dy.d) v = rng.normal();
  for (double& v : bias) v = rng.normal();
  nn::Mat y(batch, out), y_ref(batch, out), dw(out, in), dw_ref(out, in);

  const double flops_fwd = 2.0 * batch * in * out;
  const double flops_gw = 2.0 * batch * in * out;

  std::printf("kernel benchmark: batch=%d in=%d out=%d\n", batch, in, out);

  auto report = [&](const char* name, double t_ref, double t1, double tn,
                    double flops, double max_dev, bool bit_identical) {
    std::printf(
        "  %-22s reference %8.3f ms | optimized(1T) %8.3f ms (%5.2fx, %6.2f "
        "GF/s) | optimized(%dT) %8.3f ms (%5.2fx) | dev vs ref %.2e | threads "
        "bit-identical: %s\n",
        name, 1e3 * t_ref, 1e3 * t1, t_ref / t1, flops / t1 * 1e-9, threads,
        1e3 * tn, t_ref / tn, max_dev, bit_identical ? "yes" : "NO");
  };

  // forward
  double t_ref = time_loop(repeats, [&] {
    kernels::reference::linear_forward(x.d.data(), w.d.data(), bias.data(),
                                       y_ref.d.data(), batch, in, out);
  });
  parallel::set_max_threads(1);
  double t1 = time_loop(repeats, [&] {
    kernels::linear_forward(x.d.data(), w.d.data(), bias.data(), y.d.data(),
                            batch, in, out);
  });
  nn::Mat y_serial = y;
  parallel::set_max_threads(threads);
  double tn = time_loop(repeats, [&] {
    kernels::linear_forward(x.d.data(), w.d.data(), bias.data(), y.d.data(),
                            batch, in, out);
  });
  double dev = 0.0;
  for (size_t i = 0; i < y.d.size(); ++i)
    dev = std::max(dev, std::abs(y.d[i] - y_ref.d[i]));
  report("linear_forward", t_ref, t1, tn, flops_fwd, dev, y.d == y_serial.d);

  // weight gradients
  t_ref = time_loop(repeats, [&] {
    kernels::reference::linear_grad_weights(dy.d.data(), x.d.data(),
                                            dw_ref.d.data(), batch, in, out);
  });
  parallel::set_max_threads(1);
  t1 = time_loop(repeats, [&] {
    kernels::linear_grad_weights(dy.d.data(), x.d.data(), dw.d.data(), batch,
                                 in, out);
  });
  nn::Mat dw_serial = dw;
  parallel::set_max_threads(threads);
  tn = time_loop(repeats, [&] {
    kernels::linear_grad_weights(dy.d.data(), x.d.data(), dw.d.data(), batch,
                                 in, out);
  });
  dev = 0.0;
  for (size_t i = 0; i < dw.d.size(); ++i)
    dev = std::max(dev, std::abs(dw.d[i] - dw_ref.d[i]));
  report("linear_grad_weights", t_ref, t1, tn, flops_gw, dev, dw.d == dw_serial.d);
}

void bench_episode(const vhmpc::Scenario& scenario, int threads) {
  using namespace vhmpc;
  std::printf("episode benchmark: %zu robots, %zu obstacles, N=%d, K=%d\n",
              scenario.robots.size(), scenario.obstacles.size(),
              scenario.fixed_horizon, scenario.params.max_steps);

  parallel::set_max_threads(1);
  auto t0 = Clock::now();
  const EpisodeResult serial = run_episode(scenario);
  const double t_serial = seconds_since(t0);

  parallel::set_max_threads(threads);
  t0 = Clock::now();
  const EpisodeResult par = run_episode(scenario);
  const double t_par = seconds_since(t0);

  const bool identical =
      io::trajectory_csv(serial) == io::trajectory_csv(par) &&
      serial.metrics.path_cost == par.metrics.path_cost;
  std::printf(
      "  serial %7.3f s (%6.2f ms/step) | %d threads %7.3f s (%6.2f ms/step, "
      "%4.2fx) | results bit-identical: %s\n",
      t_serial, 1e3 * t_serial / std::max(1, serial.steps), threads, t_par,
      1e3 * t_par / std::max(1, par.steps), t_serial / t_par,
      identical ? "yes" : "NO");
}

vhmpc::Scenario default_scenario() {
  using namespace vhmpc;
  Scenario sc;
  // Two facing rows of robots exchanging sides, obstacles between the lanes.
  const int per_side = 7;
  for (int i = 0; i < per_side; ++i) {
    const double y = 2.5 + 3.0 * i;
    sc.robots.push_back({{2.5, y}, {22.5, y}});
    sc.robots.push_back({{22.5, y + 1.5}, {2.5, y + 1.5}});
  }
  sc.obstacles = {{{12.5, 6.2}}, {{12.5, 12.2}}, {{12.5, 18.2}}};
  sc.mode = HorizonMode::kFixed;
  sc.fixed_horizon = 20;
  return sc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP benchmark"};
  int threads = vhmpc::parallel::max_threads();
  int batch = 256;
  int hidden = 256;
  int repeats = 50;
  std::string scenario_path;
  app.add_option("--threads", threads, "Parallel thread count to compare");
  app.add_option("--batch", batch, "Kernel benchmark batch size");
  app.add_option("--hidden", hidden, "Kernel benchmark layer width");
  app.add_option("--repeat", repeats, "Kernel benchmark repetitions");
  app.add_option("--scenario", scenario_path, "Scenario for the episode benchmark");
  CLI11_PARSE(app, argc, argv);

  bench_kernels(batch, hidden, threads, repeats);
  vhmpc::Scenario sc = scenario_path.empty()
                           ? default_scenario()
                           : vhmpc::io::load_scenario(scenario_path);
  bench_episode(sc, threads);
  return 0;
}

// Times the batch kernels in serial and OpenMP modes across thread counts.
// The two paths are bit-identical (see tests/test_kernels.cpp); this tool
// reports what the parallel path buys on the current machine.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "swann/nn/batch.hpp"
#include "swann/rl/objectives.hpp"
#include "swann/util/rng.hpp"

using namespace swann;
using namespace swann::rl;
using clk = std::chrono::steady_clock;

namespace {

double ms_since(clk::time_point t0) {
  return std::chrono::duration<double, std::milli>(clk::now() - t0).count();
}

Batch make_batch(int n, int obs, int act, uint64_t seed) {
  Rng rng(seed);
  Batch b;
  b.size = n;
  b.obs_dim = obs;
  b.act_dim = act;
  b.s.resize(static_cast<size_t>(n) * obs);
  b.s2.resize(static_cast<size_t>(n) * obs);
  b.s_pert.resize(static_cast<size_t>(n) * obs);
  b.a.resize(static_cast<size_t>(n) * act);
  b.r.resize(n, 0.005);
  b.done.resize(n, 0.0);
  for (auto& v : b.s) v = rng.uniform(-1, 1);
  for (auto& v : b.s2) v = rng.uniform(-1, 1);
  for (auto& v : b.s_pert) v = rng.uniform(-1, 1);
  for (auto& v : b.a) v = rng.uniform(-1, 1);
  return b;
}

}  // namespace

int main(int argc, char** argv) {
  const int iters = argc > 1 ? std::atoi(argv[1]) : 300;
  const int batch = 100;
  Rng rng(1);
  ObjectiveWeights w;
  auto b = AgentBundle::make(Algo::Ddpgx, 13, 4, {32, 32}, w, 1e-4, 1e-4, rng);
  for (auto& p : b.policy.params) p = static_cast<float>(rng.uniform(-0.5, 0.5));
  auto data = make_batch(batch, 13, 4, 2);
  std::vector<double> y(batch);

  std::printf("full ddpgx update (critic targets + regress + actor), batch %d\n",
              batch);
  std::printf("%-8s %-10s %-12s %-10s\n", "mode", "threads", "ms/update",
              "speedup");

  auto run = [&](nn::ExecMode mode) {
    Workspace ws;
    // warmup
    critic_targets(mode, b.policy_target, b.q1_target, nullptr, w.gamma, data,
                   ws, y);
    const auto t0 = clk::now();
    for (int i = 0; i < iters; ++i) {
      critic_targets(mode, b.policy_target, b.q1_target, nullptr, w.gamma,
                     data, ws, y);
      critic_regress(mode, b.q1, *b.opt_q1, data, y, ws);
      multiplicative_objective(mode, b, data, ws);
    }
    return ms_since(t0) / iters;
  };

  const double serial_ms = run(nn::ExecMode::Serial);
  std::printf("%-8s %-10s %-12.4f %-10s\n", "serial", "-", serial_ms, "1.00x");
  for (int threads : {1, 2, 4, omp_get_max_threads()}) {
    omp_set_num_threads(threads);
    const double ms = run(nn::ExecMode::OpenMP);
    std::printf("%-8s %-10d %-12.4f %.2fx\n", "openmp", threads, ms,
                serial_ms / ms);
  }
  return 0;
}

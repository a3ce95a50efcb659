#include <benchmark/benchmark.h>

#include <array>
#include <vector>

#include "tpinn/autodiff.hpp"
#include "tpinn/dataset.hpp"
#include "tpinn/mlp.hpp"
#include "tpinn/pde.hpp"
#include "tpinn/rng.hpp"
#include "tpinn/train.hpp"

using namespace tpinn;

namespace {

std::vector<train::Sample> batch(std::size_t n) {
  Rng rng(1);
  std::vector<train::Sample> out(n);
  for (auto& s : out) s = {rng.uniform(), rng.uniform(), rng.uniform()};
  return out;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  Mlp net = init_glorot(std::vector<std::size_t>{2, 16, 16, 1}, 42);
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(net, x, 0.5));
    x += 1e-9;
  }
}
BENCHMARK(BM_Forward);

static void BM_InputDerivatives(benchmark::State& state) {
  Mlp net = init_glorot(std::vector<std::size_t>{2, 16, 16, 1}, 42);
  for (auto _ : state) benchmark::DoNotOptimize(train::input_derivatives(net, 0.3, 0.7));
}
BENCHMARK(BM_InputDerivatives);

// One full-batch loss + gradient, the unit of work of a training epoch.
static void BM_PinnLossGradient(benchmark::State& state) {
  Mlp net = init_glorot(std::vector<std::size_t>{2, 16, 16, 1}, 42);
  const auto b = batch(static_cast<std::size_t>(state.range(0)));
  ad::Tape tape;
  for (auto _ : state) {
    auto g = train::pinn_loss_gradient(tape, net, 1.2, b, 1.0);
    benchmark::DoNotOptimize(g.c);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["nodes"] = static_cast<double>(tape.size());
}
BENCHMARK(BM_PinnLossGradient)->Arg(32)->Arg(320)->Arg(800)->Unit(benchmark::kMillisecond);

static void BM_ReverseSweep(benchmark::State& state) {
  Mlp net = init_glorot(std::vector<std::size_t>{2, 16, 16, 1}, 42);
  const auto b = batch(64);
  ad::Tape tape;
  auto params = record_parameters(tape, net.params());
  auto c = ad::variable(tape, 1.0);
  auto terms = train::record_pinn_loss(tape, net, params, c, b, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(ad::reverse_sweep(tape, terms.total.id()).size());
  state.counters["nodes"] = static_cast<double>(tape.size());
}
BENCHMARK(BM_ReverseSweep)->Unit(benchmark::kMicrosecond);

static void BM_SolveGrid(benchmark::State& state) {
  pde::TransportProblem p;
  p.x_max = 6.283185307179586;
  p.t_max = 2.0;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pde::mass_drift(pde::solve_grid(p, n, n)));
}
BENCHMARK(BM_SolveGrid)->Arg(101)->Arg(201);

static void BM_FitPolynomial(benchmark::State& state) {
  Rng rng(3);
  std::vector<std::array<double, 3>> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {rng.uniform(2, 5), rng.uniform(15, 25), rng.uniform(1, 6)};
  for (auto _ : state) benchmark::DoNotOptimize(data::fit_polynomial(pts).coeffs[0]);
}
BENCHMARK(BM_FitPolynomial)->Arg(30)->Arg(1000);

BENCHMARK_MAIN();

// Microbenchmarks for the hot paths: error-rate estimation (word-parallel
// vs. scalar), the graph-network forward/backward pass, and the structural
// rewrite. Run build/benchmarks/locksmith_bench; filters work as usual
// (--benchmark_filter=...).

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "locksmith/generate.hpp"
#include "locksmith/gnn.hpp"
#include "locksmith/graph.hpp"
#include "locksmith/lock.hpp"
#include "locksmith/resynth.hpp"
#include "locksmith/sim.hpp"

namespace {

using namespace locksmith;

Netlist make_circuit(int inputs, int gates) {
  generate::GenOptions opts;
  opts.family = generate::Family::Mixed;
  opts.name = "bench";
  opts.inputs = inputs;
  opts.outputs = 4;
  opts.gates = gates;
  opts.seed = 17;
  return generate::generate(opts).netlist;
}

LockedCircuit make_locked(const Netlist& nl) { return lock_xor(nl, 8, 23); }

void bm_error_rate_words(benchmark::State& state) {
  const Netlist nl = make_circuit(static_cast<int>(state.range(0)), 120);
  const LockedCircuit lc = make_locked(nl);
  sim::ErOptions opts;
  opts.method = sim::ErOptions::Method::Exhaustive;
  for (auto _ : state) {
    auto report = sim::error_rate(nl, lc.netlist, lc.key.bits, opts);
    benchmark::DoNotOptimize(report.er);
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}
BENCHMARK(bm_error_rate_words)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

void bm_error_rate_scalar_path(benchmark::State& state) {
  // Single-pattern evaluations through the scalar cross-check path, same
  // per-pattern work the word engine amortizes 64-fold.
  const Netlist nl = make_circuit(10, 120);
  const LockedCircuit lc = make_locked(nl);
  const sim::Simulator simulator(lc.netlist);
  std::vector<bool> pattern(static_cast<std::size_t>(lc.netlist.n()), false);
  std::uint64_t x = 0;
  for (auto _ : state) {
    ++x;
    for (std::size_t i = 0; i < pattern.size(); ++i) pattern[i] = (x >> i) & 1;
    auto out = simulator.evaluate_scalar(pattern, lc.key.bits);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_error_rate_scalar_path);

void bm_gnn_forward(benchmark::State& state) {
  const Netlist nl = make_circuit(10, 120);
  const LockedCircuit lc = make_locked(nl);
  const graph::FeatureMap fmap = graph::FeatureMap::first_appearance({&lc.netlist});
  const graph::CircuitGraph g = graph::to_graph(lc.netlist, fmap, lc.key);

  gnn::GinHyper hyper;
  hyper.hidden_dim = static_cast<int>(state.range(0));
  hyper.num_layers = 3;
  const gnn::GinModel model = gnn::GinModel::init(hyper);
  for (auto _ : state) {
    auto p = gnn::forward(model, g);
    benchmark::DoNotOptimize(p.er);
  }
}
BENCHMARK(bm_gnn_forward)->Arg(16)->Arg(32)->Arg(64);

void bm_gnn_backward(benchmark::State& state) {
  const Netlist nl = make_circuit(10, 120);
  const LockedCircuit lc = make_locked(nl);
  const graph::FeatureMap fmap = graph::FeatureMap::first_appearance({&lc.netlist});

  gnn::GinHyper hyper;
  hyper.hidden_dim = static_cast<int>(state.range(0));
  hyper.num_layers = 3;
  const gnn::GinModel model = gnn::GinModel::init(hyper);

  gnn::TrainSample sample;
  sample.graph = graph::to_graph(lc.netlist, fmap, lc.key);
  sample.er = 0.25;
  gnn::LossWeights weights;
  std::vector<double> grad(gnn::parameter_count(hyper), 0.0);
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = gnn::sample_loss_and_grad(model, sample, weights, grad);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(bm_gnn_backward)->Arg(16)->Arg(32)->Arg(64);

void bm_bubble_push(benchmark::State& state) {
  const Netlist nl = make_circuit(10, static_cast<int>(state.range(0)));
  const LockedCircuit lc = make_locked(nl);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Netlist variant = resynth::bubble_push(lc.netlist, ++seed);
    benchmark::DoNotOptimize(variant.nodes.size());
  }
}
BENCHMARK(bm_bubble_push)->Arg(60)->Arg(120)->Arg(240);

}  // namespace

BENCHMARK_MAIN();

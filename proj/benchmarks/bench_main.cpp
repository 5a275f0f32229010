#include <benchmark/benchmark.h>

#include "satlab/circuit.hpp"
#include "satlab/gnn.hpp"
#include "satlab/graph_encode.hpp"
#include "satlab/oracle.hpp"

namespace {

using namespace satlab;

void BM_Dpll(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto f = generate_random_3sat(n, clauses_for_ratio(4.26, n), 7);
  for (auto _ : state) benchmark::DoNotOptimize(dpll_sat(f));
}
BENCHMARK(BM_Dpll)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_BruteForce(benchmark::State& state) {
  const auto f = generate_random_3sat(16, clauses_for_ratio(6.0, 16), 7);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_sat(f));
}
BENCHMARK(BM_BruteForce)->Unit(benchmark::kMillisecond);

void BM_EncodeVarVar(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m = clauses_for_ratio(4.4, n);
  const auto f = generate_random_3sat(n, m, 3);
  for (auto _ : state) {
    auto g = graph::encode_var_var(f, m);
    benchmark::DoNotOptimize(g.to_labeled_graph());
  }
}
BENCHMARK(BM_EncodeVarVar)->Arg(20)->Arg(100)->Unit(benchmark::kMicrosecond);

struct GnnCase {
  gnn::LabeledGraph graph;
  gnn::GnnModel model;
};

GnnCase gnn_case(gnn::Variant variant) {
  const auto f = generate_random_3sat(20, 88, 5);
  auto g = graph::encode_var_var(f, 88).to_labeled_graph();
  gnn::ModelShape shape;
  shape.variant = variant;
  shape.node_label_dim = g.node_label_dim();
  shape.edge_label_dim = g.edge_label_dim();
  return {std::move(g), gnn::GnnModel::random(shape, 1)};
}

void BM_GnnForward(benchmark::State& state) {
  const auto c = gnn_case(static_cast<gnn::Variant>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gnn::forward_fixed_point(c.model, c.graph, {}));
}
BENCHMARK(BM_GnnForward)
    ->Arg(static_cast<int>(gnn::Variant::Linear))
    ->Arg(static_cast<int>(gnn::Variant::Nonlinear))
    ->Unit(benchmark::kMicrosecond);

void BM_GnnExampleWithGradient(benchmark::State& state) {
  const auto c = gnn_case(static_cast<gnn::Variant>(state.range(0)));
  gnn::LossOptions options;
  options.penalty_weight = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gnn::evaluate_example(c.model, c.graph, SatStatus::Sat, {}, options, true));
  }
}
BENCHMARK(BM_GnnExampleWithGradient)
    ->Arg(static_cast<int>(gnn::Variant::Linear))
    ->Arg(static_cast<int>(gnn::Variant::Nonlinear))
    ->Unit(benchmark::kMicrosecond);

void BM_ApproxSatGrad(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto w = circuit::encode_w(generate_random_3sat(n, clauses_for_ratio(4.3, n), 2));
  circuit::RelaxedPoint p{std::vector<double>(static_cast<std::size_t>(n), 0.1), 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(circuit::log_approx_sat_grad(w, p));
}
BENCHMARK(BM_ApproxSatGrad)->Arg(20)->Arg(80)->Arg(320);

void BM_AnnealSolve(benchmark::State& state) {
  const auto w = circuit::encode_w(generate_random_3sat(20, 86, 11));
  circuit::AnnealConfig config;
  config.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(circuit::anneal_solve(w, config));
}
BENCHMARK(BM_AnnealSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

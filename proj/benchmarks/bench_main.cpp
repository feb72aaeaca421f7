#include <benchmark/benchmark.h>

#include <rnnode/datasets.hpp>
#include <rnnode/network.hpp>
#include <rnnode/odeflow.hpp>
#include <rnnode/replicator.hpp>
#include <rnnode/training.hpp>

#include <numeric>
#include <vector>

using namespace rnnode;

namespace {

RnnOdeSpec make_spec(std::size_t m, std::size_t d, std::size_t n, std::vector<std::size_t> widths) {
  Architecture arch;
  arch.input_dim = m;
  arch.state_dim = d;
  arch.num_labels = n;
  arch.hidden_widths = std::move(widths);
  return initialize_spec(arch, 1, 2.0);
}

void BM_MlpApply(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const RnnOdeSpec spec = make_spec(2, d, 3, {d});
  Vector a = Vector::Constant(static_cast<Eigen::Index>(d), 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(a = mlp_apply(spec.hidden, a));
  }
}
BENCHMARK(BM_MlpApply)->Arg(3)->Arg(10)->Arg(64);

void BM_CascadeRk4(benchmark::State& state) {
  const RnnOdeSpec spec = make_spec(2, 3, 3, {8});
  const Vector x = (Vector(2) << 0.5, -0.5).finished();
  const TimeGrid grid(5.0, 1e-3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_cascade(spec, x, grid, Method::rk4));
  }
}
BENCHMARK(BM_CascadeRk4)->Unit(benchmark::kMillisecond);

void BM_HiddenFlowRk4(benchmark::State& state) {
  const RnnOdeSpec spec = make_spec(2, 3, 3, {8});
  const Vector x = (Vector(2) << 0.5, -0.5).finished();
  const TimeGrid grid(5.0, 1e-3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hidden_flow(spec, x, grid, Method::rk4));
  }
}
BENCHMARK(BM_HiddenFlowRk4)->Unit(benchmark::kMillisecond);

void BM_BpttBatch(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Dataset data = gen_blobs(batch, circle_centers(3, 2.5), 0.7, 3);
  const RnnOdeSpec spec = make_spec(2, 3, 3, {8});
  std::vector<std::size_t> idx(batch);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(bptt_gradient(spec, data, idx, spec.n_steps));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_BpttBatch)->Arg(32)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_BpttMnistShape(benchmark::State& state) {
  Dataset data;
  data.input_dim = 784;
  data.num_labels = 10;
  for (std::size_t j = 0; j < 32; ++j) {
    data.inputs.push_back(Vector::Constant(784, static_cast<double>(j % 7) / 7.0));
    data.labels.push_back(j % 10);
  }
  const RnnOdeSpec spec = make_spec(784, 10, 10, {8});
  std::vector<std::size_t> idx(32);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(bptt_gradient(spec, data, idx, spec.n_steps));
  }
}
BENCHMARK(BM_BpttMnistShape)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

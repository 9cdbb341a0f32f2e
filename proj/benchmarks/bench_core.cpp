// Microbenchmarks for the hot paths: forward/backward, curvature extraction,
// one federated round, and the full unlearning pipeline at desk scale.

#include <benchmark/benchmark.h>

#include "fedunlearn/curvature.hpp"
#include "fedunlearn/fed.hpp"
#include "fedunlearn/train.hpp"
#include "fedunlearn/unlearn.hpp"

namespace {

using namespace fedunlearn;

struct Fixture {
  NetworkSpec spec = mlp_spec(784, {64, 32}, 10);
  Dataset data = synth_blobs(10, 100, 784, 0.08, 1, 3);
  Partition partition = partition_random(data, 5, 2);
  ParamSet params = init_params(spec, 3);

  Fixture() { partition = mark_forget(data, partition, ForgetClient{0}); }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_forward(benchmark::State& state) {
  auto& f = fixture();
  const auto idx = all_indices(static_cast<size_t>(state.range(0)));
  const Tensor batch = gather_rows(f.data.features, idx);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(f.spec, f.params, batch));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_forward)->Arg(32)->Arg(256);

void BM_loss_and_grad(benchmark::State& state) {
  auto& f = fixture();
  const auto idx = all_indices(static_cast<size_t>(state.range(0)));
  const Tensor batch = gather_rows(f.data.features, idx);
  const auto labels = gather_labels(f.data.labels, idx);
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_grad(f.spec, f.params, batch, labels));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_loss_and_grad)->Arg(32)->Arg(256);

void BM_hessian_diag(benchmark::State& state) {
  auto& f = fixture();
  const auto idx = all_indices(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hessian_diag(f.spec, f.params, f.data, idx));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_hessian_diag)->Arg(64)->Arg(512);

void BM_fed_round(benchmark::State& state) {
  auto& f = fixture();
  FedConfig cfg;
  cfg.rounds = 1;
  cfg.local_epochs = 1;
  cfg.seed = 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fed_train(f.spec, f.params, f.data, f.partition, cfg, SampleFilter::All));
  }
}
BENCHMARK(BM_fed_round)->Unit(benchmark::kMillisecond);

void BM_unlearn_pipeline(benchmark::State& state) {
  auto& f = fixture();
  FedConfig cfg;
  cfg.rounds = 1;
  cfg.local_epochs = 1;
  cfg.seed = 9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(unlearn_pipeline(f.spec, f.params, f.params, f.data, f.partition, 0.4, cfg));
  }
}
BENCHMARK(BM_unlearn_pipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

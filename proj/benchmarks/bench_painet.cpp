#include <benchmark/benchmark.h>

#include "painet/data.hpp"
#include "painet/metrics.hpp"
#include "painet/verify.hpp"

using namespace painet;

namespace {

ModelHyper bench_hyper() {
  ModelHyper h;
  h.embed_dim = 32;
  h.horizon = 5;
  h.decoder_layers = 3;
  h.n_types = 2;
  h.feat_dim = 2;
  h.edge_attr_dim = 1;
  h.encoder_hidden = 32;
  h.decoder_hidden = 32;
  h.tie_steps = true;
  return h;
}

}  // namespace

static void BM_AttentionStep(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::size_t d = 32;
  Rng rng(1);
  Array h = rowwise_l2_normalize(rng.gaussian_array({n, d}), 1e-12);
  auto params = AttentionLayerParams::init(d, 0.5, rng);
  PairwiseMaps maps = PairwiseMaps::init(2, rng);
  Array onehot({n, 2});
  for (std::size_t i = 0; i < n; ++i) onehot(i, i % 2) = 1.0;
  PairwiseMaps bound = maps.bind(std::move(onehot));
  for (auto _ : state) {
    benchmark::DoNotOptimize(attention_step_matrix(Var::constant(h), params, bound).value());
  }
  state.SetComplexityN(static_cast<benchmark::ComplexityN>(n));
}
BENCHMARK(BM_AttentionStep)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void BM_Predict(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::size_t horizon = static_cast<std::size_t>(state.range(1));
  ModelHyper hyper = bench_hyper();
  Rng rng(2);
  Model model(hyper, rng);
  SystemState s = verify::random_system(n, hyper, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(s, horizon));
  }
}
BENCHMARK(BM_Predict)->Args({16, 5})->Args({64, 5})->Args({64, 10})->Args({256, 5});

static void BM_TrainStep(benchmark::State& state) {
  ModelHyper hyper = bench_hyper();
  hyper.tie_steps = false;
  Rng rng(3);
  Model model(hyper, rng);
  SystemState s = verify::random_system(10, hyper, rng);
  Trajectory truth;
  for (std::size_t t = 0; t < hyper.horizon; ++t) {
    truth.frames.push_back(add(s.positions, rng.gaussian_array({10, 3}, 0.1)));
  }
  for (auto _ : state) {
    Var loss = trajectory_loss_var(model.predict_vars(s, hyper.horizon), truth);
    benchmark::DoNotOptimize(backward(loss));
  }
}
BENCHMARK(BM_TrainStep);

static void BM_Simulate(benchmark::State& state) {
  SimConfig cfg;
  cfg.n_particles = static_cast<std::size_t>(state.range(0));
  cfg.frames = 5;
  cfg.stride = 40;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(cfg, seed++));
  }
}
BENCHMARK(BM_Simulate)->Arg(10)->Arg(40);

BENCHMARK_MAIN();

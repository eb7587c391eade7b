#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>

#include "maclab/data.hpp"
#include "maclab/mac.hpp"
#include "maclab/machine.hpp"
#include "maclab/rivals.hpp"

namespace {

using namespace maclab;

// Dense gaussian features with a linear signal plus unit noise; enough
// structure that tree splits and ridge solves do real work.
Dataset synthetic(int n, int l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Dataset data;
  data.features = Eigen::MatrixXd::NullaryExpr(
      n, l, [&]() -> double { return gauss(rng); });
  data.target = data.features.rowwise().sum() +
                Eigen::VectorXd::NullaryExpr(
                    n, [&]() -> double { return 0.5 * gauss(rng); });
  for (int j = 0; j < l; ++j) {
    data.feature_names.push_back("x" + std::to_string(j + 1));
  }
  return data;
}

void BM_RidgeFit(benchmark::State& state) {
  const Dataset data = synthetic(static_cast<int>(state.range(0)), 10, 1);
  for (auto _ : state) {
    FittedMachine fitted = fit_ridge(data, 1.0);
    benchmark::DoNotOptimize(fitted);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RidgeFit)->Arg(200)->Arg(1000)->Arg(5000);

void BM_TreeFit(benchmark::State& state) {
  const Dataset data = synthetic(static_cast<int>(state.range(0)), 10, 2);
  TreeParams params;
  params.max_depth = 6;
  for (auto _ : state) {
    FittedMachine fitted = fit_tree(data, params);
    benchmark::DoNotOptimize(fitted);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TreeFit)->Arg(200)->Arg(1000);

void BM_MlpFit(benchmark::State& state) {
  const Dataset data = synthetic(static_cast<int>(state.range(0)), 10, 3);
  MlpConfig cfg;
  cfg.widths = {16, 16, 16, 16, 1};
  cfg.activations = {Activation::tanh, Activation::tanh, Activation::tanh,
                     Activation::tanh, Activation::linear};
  cfg.epochs = 10;
  cfg.seed = 7;
  for (auto _ : state) {
    FittedMachine fitted = fit_mlp(data, cfg);
    benchmark::DoNotOptimize(fitted);
  }
}
BENCHMARK(BM_MlpFit)->Arg(200)->Arg(500);

void BM_TreePredict(benchmark::State& state) {
  const Dataset train = synthetic(1000, 10, 4);
  const Dataset query = synthetic(static_cast<int>(state.range(0)), 10, 5);
  TreeParams params;
  params.max_depth = 8;
  const FittedMachine fitted = fit_tree(train, params);
  for (auto _ : state) {
    Eigen::VectorXd pred = fitted.predict(query.features);
    benchmark::DoNotOptimize(pred);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TreePredict)->Arg(1000)->Arg(10000);

// A deliberately small collaboration loop: ridge and tree only, so the
// benchmark tracks orchestration cost rather than MLP training time.
void BM_MacFit(benchmark::State& state) {
  const Dataset train = synthetic(static_cast<int>(state.range(0)), 10, 6);
  const Dataset val = synthetic(static_cast<int>(state.range(0)) / 4, 10, 7);
  MacConfig config;
  MachineSpec ridge;
  ridge.kind = MachineKind::ridge;
  ridge.grid = {RidgeParams{0.1}, RidgeParams{1.0}, RidgeParams{10.0}};
  MachineSpec tree;
  tree.kind = MachineKind::tree;
  tree.grid = {TreeParams{4, 0.0, 5}, TreeParams{6, 0.0, 5}};
  config.machines = {ridge, tree};
  config.max_iterations = 5;
  for (auto _ : state) {
    MacModel model = fit_mac(config, train, val);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_MacFit)->Arg(200)->Arg(800);

void BM_SuperLearnerFit(benchmark::State& state) {
  const Dataset train = synthetic(static_cast<int>(state.range(0)), 10, 8);
  const Dataset val = synthetic(static_cast<int>(state.range(0)) / 4, 10, 9);
  SuperLearnerConfig config;
  MachineSpec ridge;
  ridge.kind = MachineKind::ridge;
  ridge.grid = {RidgeParams{0.1}, RidgeParams{1.0}};
  MachineSpec tree;
  tree.kind = MachineKind::tree;
  tree.grid = {TreeParams{4, 0.0, 5}, TreeParams{6, 0.0, 5}};
  config.machines = {ridge, tree};
  for (auto _ : state) {
    SuperLearnerModel model = fit_super_learner(config, train, val);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_SuperLearnerFit)->Arg(200)->Arg(800);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "healsim/dataset.hpp"
#include "healsim/elevator.hpp"
#include "healsim/experiment.hpp"
#include "healsim/graph.hpp"
#include "healsim/model.hpp"
#include "healsim/protocols.hpp"
#include "healsim/rng.hpp"
#include "healsim/world.hpp"

namespace {

using namespace healsim;

Dataset bench_dataset(std::size_t n, std::size_t dim) {
  return generate_synthetic(n, dim, 2, 2.0, 7);
}

void BM_ElevatorCycle(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ElevatorOverlay overlay(5, 20, 11);
  overlay.bootstrap(gen_kregular(n, 20, 11));
  for (auto _ : state) {
    overlay.run_cycle();
    benchmark::DoNotOptimize(overlay.cycles_run());
  }
}
BENCHMARK(BM_ElevatorCycle)->Arg(100)->Arg(300);

void BM_TrainStep(benchmark::State& state) {
  const Dataset ds = bench_dataset(64, 57);
  ModelSpec spec{ModelKind::BinaryLogistic, ds.dim, 1};
  ModelParams model = init_params(spec, 3);
  Hyperparams hp;
  std::vector<std::size_t> rows(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) rows[i] = i;
  DataShard shard{0, &ds, rows};
  Rng rng(5);
  for (auto _ : state) {
    model = train_step(model, shard, hp, rng);
    benchmark::DoNotOptimize(model.values.data());
  }
}
BENCHMARK(BM_TrainStep);

void BM_AverageModels(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  ModelSpec spec{ModelKind::BinaryLogistic, 57, 1};
  std::vector<ModelParams> models;
  for (std::size_t i = 0; i < count; ++i) models.push_back(init_params(spec, i + 1));
  for (auto _ : state) {
    ModelAverager avg;
    for (const auto& m : models) avg.add(m);
    ModelParams out = avg.finish();
    benchmark::DoNotOptimize(out.values.data());
  }
}
BENCHMARK(BM_AverageModels)->Arg(100);

void BM_Evaluate(benchmark::State& state) {
  const Dataset ds = bench_dataset(920, 57);
  ModelSpec spec{ModelKind::BinaryLogistic, ds.dim, 1};
  const ModelParams model = init_params(spec, 3);
  for (auto _ : state) {
    double acc = evaluate(model, ds);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_Evaluate);

void BM_HealCycle(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.name = "bench";
  cfg.protocol = ProtocolKind::Heal;
  cfg.topology = TopologyKind::Elevator;
  cfg.n_nodes = 100;
  cfg.cycles = 1;
  cfg.repetitions = 1;
  cfg.dataset.kind = DatasetSource::Kind::Synthetic;
  cfg.dataset.n = 1000;
  cfg.dataset.dim = 57;
  const PreparedData data = prepare_data(cfg);

  const std::uint64_t rep_seed = repetition_seed(cfg, 0);
  World w;
  w.rep_seed = rep_seed;
  w.hyper = cfg.hyper;
  w.dynamic = true;
  w.overlay = ElevatorOverlay(cfg.h, cfg.cache_c, rep_seed);
  w.overlay.bootstrap(gen_kregular(cfg.n_nodes, cfg.cache_c, rep_seed));

  std::vector<std::size_t> rows(data.train.n);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  auto groups = partition_indices(std::move(rows), cfg.n_nodes, rep_seed);
  ModelParams init = init_params(data.spec, rep_seed);
  for (std::size_t i = 0; i < cfg.n_nodes; ++i) {
    NodeState st;
    st.model = init;
    st.shard = DataShard{static_cast<NodeId>(i), &data.train, std::move(groups[i])};
    w.nodes.emplace(static_cast<NodeId>(i), std::move(st));
  }

  HealProtocol protocol(HealOptions{cfg.s, false});
  std::uint64_t cycle = 0;
  for (auto _ : state) {
    w.cycle = ++cycle;
    w.overlay.run_cycle();
    w.refresh_graph();
    protocol.step(w);
    benchmark::DoNotOptimize(w.bus.total_sent());
  }
}
BENCHMARK(BM_HealCycle);

}  // namespace

BENCHMARK_MAIN();

#include "healsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numeric>
#include <thread>
#include <utility>

#include "healsim/config_io.hpp"
#include "healsim/errors.hpp"
#include "healsim/protocols.hpp"
#include "healsim/rng.hpp"
#include "healsim/world.hpp"

namespace healsim {

const char* to_string(ProtocolKind p) {
  switch (p) {
    case ProtocolKind::Heal: return "heal";
    case ProtocolKind::FedAvg: return "fedavg";
    case ProtocolKind::Gaia: return "gaia";
    case ProtocolKind::Gossip: return "gossip";
    case ProtocolKind::Epidemic: return "epidemic";
  }
  return "?";
}

const char* to_string(TopologyKind t) {
  switch (t) {
    case TopologyKind::Elevator: return "elevator";
    case TopologyKind::Star: return "star";
    case TopologyKind::MultiStar: return "multistar";
    case TopologyKind::Ring: return "ring";
    case TopologyKind::KRegular: return "kregular";
    case TopologyKind::Chord: return "chord";
    case TopologyKind::Complete: return "complete";
  }
  return "?";
}

bool FaultSchedule::churn_scheduled() const {
  for (const auto& ev : events)
    if (ev.kind == FaultEvent::Kind::ChurnWindow) return true;
  return false;
}

void ExperimentConfig::validate() const {
  auto fail = [this](const std::string& field, const std::string& msg) {
    throw ConfigError("entry '" + name + "': field '" + field + "': " + msg);
  };
  if (name.empty()) throw ConfigError("experiment entry has an empty name");
  if (n_nodes < 2) fail("n_nodes", "need at least 2 nodes");
  if (cycles < 1) fail("cycles", "must be >= 1");
  if (repetitions < 1) fail("repetitions", "must be >= 1");
  if (h < 1) fail("h", "must be >= 1");
  if (protocol == ProtocolKind::Heal) {
    if (s < 1) fail("s", "must be >= 1");
    if (s > h) fail("s", "must not exceed h (" + std::to_string(h) + ")");
  }
  if (topology == TopologyKind::Elevator) {
    if (cache_c < 1) fail("cache_c", "must be >= 1");
    if (h > cache_c) fail("h", "must not exceed cache_c");
    if (cache_c >= n_nodes) fail("cache_c", "must be below n_nodes");
    if ((n_nodes * cache_c) % 2 != 0)
      fail("cache_c", "n_nodes * cache_c must be even (k-regular bootstrap)");
  }
  if (topology == TopologyKind::KRegular) {
    if (topology_k < 1 || topology_k >= n_nodes) fail("topology_k", "need 1 <= k < n_nodes");
    if ((n_nodes * topology_k) % 2 != 0) fail("topology_k", "n_nodes * k must be even");
  }
  if (topology == TopologyKind::MultiStar && h >= n_nodes)
    fail("h", "multi-star needs fewer servers than nodes");
  if (protocol == ProtocolKind::FedAvg && topology != TopologyKind::Star)
    fail("topology", "fedavg runs on the star topology");
  if (protocol == ProtocolKind::Gaia && topology != TopologyKind::MultiStar)
    fail("topology", "gaia runs on the multistar topology");
  try {
    hyper.validate();
  } catch (const ConfigError& e) {
    fail("hyperparams", e.what());
  }
  if (hyper.batch_size > 0 && hyper.batch_size > (1u << 30)) fail("batch_size", "implausibly large");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) fail("test_fraction", "must lie in (0, 1)");
  if (churn_reserve_fraction < 0.0 || churn_reserve_fraction >= 1.0)
    fail("churn_reserve_fraction", "must lie in [0, 1)");
  if (diameter_every < 1) fail("diameter_every", "must be >= 1");
  if (elevator_steps < 1) fail("elevator_steps", "must be >= 1");
  if (dataset.kind == DatasetSource::Kind::Csv) {
    if (dataset.path.empty()) fail("dataset.path", "csv source needs a path");
  } else {
    if (dataset.classes < 2) fail("dataset.classes", "must be >= 2");
    if (dataset.n < dataset.classes) fail("dataset.n", "must be >= dataset.classes");
    if (dataset.dim < 1) fail("dataset.dim", "must be >= 1");
  }
  for (std::size_t i = 0; i < faults.events.size(); ++i) {
    const FaultEvent& ev = faults.events[i];
    const std::string where = "faults[" + std::to_string(i) + "]";
    switch (ev.kind) {
      case FaultEvent::Kind::CrashFractionUniform:
        if (!(ev.fraction > 0.0 && ev.fraction <= 1.0)) fail(where + ".fraction", "must lie in (0, 1]");
        if (ev.cycle > cycles) fail(where + ".cycle", "beyond the last cycle");
        break;
      case FaultEvent::Kind::CrashNodes:
        if (ev.nodes.empty()) fail(where + ".nodes", "empty crash list");
        if (ev.cycle > cycles) fail(where + ".cycle", "beyond the last cycle");
        break;
      case FaultEvent::Kind::CrashAllHubs:
        if (ev.cycle > cycles) fail(where + ".cycle", "beyond the last cycle");
        break;
      case FaultEvent::Kind::CrashHubs:
        if (ev.count < 1) fail(where + ".count", "must be >= 1");
        if (ev.cycle > cycles) fail(where + ".cycle", "beyond the last cycle");
        break;
      case FaultEvent::Kind::ChurnWindow:
        if (!(ev.rate > 0.0 && ev.rate <= 1.0)) fail(where + ".rate", "must lie in (0, 1]");
        if (ev.start_cycle > ev.end_cycle) fail(where + ".start_cycle", "window start after end");
        if (ev.end_cycle > cycles) fail(where + ".end_cycle", "beyond the last cycle");
        if (ev.new_node_degree < 1) fail(where + ".new_node_degree", "must be >= 1");
        break;
    }
  }
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t repetition_seed(const ExperimentConfig& cfg, std::size_t rep) {
  return derive_seed(cfg.master_seed, {seed_tag::kRepetition, rep});
}

namespace {

std::string resolve_data_path(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<std::string> tried;
  auto try_path = [&tried](const fs::path& p) -> std::string {
    tried.push_back(p.string());
    std::error_code ec;
    return fs::exists(p, ec) ? p.string() : std::string();
  };
  if (auto found = try_path(path); !found.empty()) return found;
  if (!fs::path(path).is_absolute()) {
    if (const char* dir = std::getenv("HEALSIM_DATA_DIR"); dir != nullptr && *dir != '\0')
      if (auto found = try_path(fs::path(dir) / path); !found.empty()) return found;
    if (auto found = try_path(fs::path("data") / path); !found.empty()) return found;
  }
  std::string msg = "dataset file not found; tried:";
  for (const auto& t : tried) msg += " '" + t + "'";
  msg += " (set HEALSIM_DATA_DIR to the directory holding the file)";
  throw IoError(msg);
}

ModelSpec spec_for(const Dataset& train) {
  if (train.num_classes < 2) throw ConfigError("dataset has a single class; nothing to learn");
  ModelSpec spec;
  spec.input_dim = train.dim;
  if (train.num_classes == 2) {
    spec.kind = ModelKind::BinaryLogistic;
    spec.num_classes = 1;
  } else {
    spec.kind = ModelKind::MultinomialLogistic;
    spec.num_classes = static_cast<std::size_t>(train.num_classes);
  }
  return spec;
}

std::size_t reserve_row_count(const ExperimentConfig& cfg, std::size_t train_rows) {
  if (!cfg.faults.churn_scheduled() || cfg.churn_reserve_fraction <= 0.0) return 0;
  auto count = static_cast<std::size_t>(
      std::llround(cfg.churn_reserve_fraction * static_cast<double>(train_rows)));
  if (train_rows - count < cfg.n_nodes) count = train_rows - cfg.n_nodes;
  return count;
}

void apply_crash(World& w, const FaultEvent& ev) {
  std::vector<NodeId> victims;
  switch (ev.kind) {
    case FaultEvent::Kind::CrashFractionUniform: {
      const std::size_t live = w.nodes.size();
      auto k = static_cast<std::size_t>(
          std::ceil(ev.fraction * static_cast<double>(live)));
      if (k > live) {
        std::cerr << "warning: crash event at cycle " << ev.cycle << " asks for " << k
                  << " nodes with only " << live << " live; crashing all\n";
        k = live;
      }
      Rng rng(derive_seed(w.rep_seed, {seed_tag::kFault, w.cycle}));
      victims = rng.sample_without_replacement(w.live_ids(), k);
      break;
    }
    case FaultEvent::Kind::CrashNodes:
      for (NodeId id : ev.nodes)
        if (w.live(id)) victims.push_back(id);
      break;
    case FaultEvent::Kind::CrashAllHubs:
      victims = w.current_hubs;
      break;
    case FaultEvent::Kind::CrashHubs: {
      const std::size_t k = std::min(ev.count, w.current_hubs.size());
      victims.assign(w.current_hubs.begin(), w.current_hubs.begin() + static_cast<long>(k));
      break;
    }
    case FaultEvent::Kind::ChurnWindow:
      break;
  }
  for (NodeId id : victims) w.kill(id);
}

struct ChurnState {
  std::vector<std::size_t> reserve;  // held-back training rows
  std::size_t head = 0;              // next unused reserve row
  std::size_t shard_target = 1;
  NodeId next_id = 0;
};

void apply_churn(World& w, const FaultEvent& ev, const PreparedData& data, ChurnState& churn) {
  const std::size_t live = w.nodes.size();
  if (live == 0) return;
  auto out_count =
      static_cast<std::size_t>(std::ceil(ev.rate * static_cast<double>(live)));
  out_count = std::min(out_count, live);

  Rng rng(derive_seed(w.rep_seed, {seed_tag::kChurn, w.cycle}));
  for (NodeId v : rng.sample_without_replacement(w.live_ids(), out_count)) {
    // A departing node's rows flow back into the reserve so joiners keep the
    // full training set in circulation; sustained churn would otherwise
    // shrink the data the network holds down to the initial reserve.
    auto& shard_rows = w.nodes.at(v).shard.indices;
    churn.reserve.insert(churn.reserve.end(), shard_rows.begin(), shard_rows.end());
    w.kill(v);
  }

  // Every joiner links into the nodes that survived the removal wave.
  const std::vector<NodeId> anchors = w.live_ids();

  for (std::size_t j = 0; j < out_count; ++j) {
    const NodeId id = churn.next_id++;

    NodeState st;
    st.model = init_params(data.spec, derive_seed(w.rep_seed, {seed_tag::kChurnModel, id}));
    std::vector<std::size_t> rows;
    while (rows.size() < churn.shard_target && churn.head < churn.reserve.size())
      rows.push_back(churn.reserve[churn.head++]);
    if (rows.size() < churn.shard_target && !churn.reserve.empty()) {
      // Reserve exhausted: resample with replacement so late joiners still
      // train on reserve data.
      Rng rr(derive_seed(w.rep_seed, {seed_tag::kChurnShard, id}));
      while (rows.size() < churn.shard_target)
        rows.push_back(churn.reserve[rr.below(churn.reserve.size())]);
    }
    st.shard = DataShard{id, &data.train, std::move(rows)};
    w.nodes.emplace(id, std::move(st));

    const std::size_t degree = std::min(ev.new_node_degree, anchors.size());
    Rng cr(derive_seed(w.rep_seed, {seed_tag::kChurnCache, id}));
    std::vector<NodeId> peers = cr.sample_without_replacement(anchors, degree);
    if (w.dynamic) {
      w.overlay.add_node(id, std::move(peers));
    } else {
      w.static_graph.add_node(id);
      for (NodeId p : peers) {
        w.static_graph.add_edge(id, p);
        w.static_graph.add_edge(p, id);
      }
    }
  }
}

std::unique_ptr<Protocol> make_protocol(const ExperimentConfig& cfg) {
  switch (cfg.protocol) {
    case ProtocolKind::Heal:
      return std::make_unique<HealProtocol>(HealOptions{cfg.s, cfg.weighted_hub_average});
    case ProtocolKind::FedAvg:
      return std::make_unique<FedAvgProtocol>(NodeId{0});
    case ProtocolKind::Gaia: {
      std::vector<NodeId> servers;
      std::map<NodeId, NodeId> assignment;
      for (std::size_t i = 0; i < cfg.h; ++i) servers.push_back(static_cast<NodeId>(i));
      for (std::size_t i = cfg.h; i < cfg.n_nodes; ++i)
        assignment.emplace(static_cast<NodeId>(i), static_cast<NodeId>((i - cfg.h) % cfg.h));
      return std::make_unique<GaiaProtocol>(std::move(servers), std::move(assignment));
    }
    case ProtocolKind::Gossip:
      return std::make_unique<GossipProtocol>();
    case ProtocolKind::Epidemic:
      return std::make_unique<EpidemicProtocol>();
  }
  throw ConfigError("unknown protocol");
}

DirectedGraph build_static_topology(const ExperimentConfig& cfg, std::uint64_t rep_seed) {
  switch (cfg.topology) {
    case TopologyKind::Star: return gen_star(cfg.n_nodes);
    case TopologyKind::MultiStar: return gen_multistar(cfg.n_nodes, cfg.h);
    case TopologyKind::Ring: return gen_ring(cfg.n_nodes);
    case TopologyKind::KRegular: return gen_kregular(cfg.n_nodes, cfg.topology_k, rep_seed);
    case TopologyKind::Chord: return gen_chord(cfg.n_nodes);
    case TopologyKind::Complete: return gen_complete(cfg.n_nodes);
    case TopologyKind::Elevator: break;
  }
  throw ConfigError("not a static topology");
}

}  // namespace

PreparedData prepare_data(const ExperimentConfig& cfg) {
  Dataset full;
  if (cfg.dataset.kind == DatasetSource::Kind::Csv) {
    full = load_csv(resolve_data_path(cfg.dataset.path), cfg.dataset.label_column,
                    cfg.dataset.header);
  } else {
    full = generate_synthetic(cfg.dataset.n, cfg.dataset.dim, cfg.dataset.classes,
                              cfg.dataset.separation, cfg.master_seed);
  }

  auto [train, test] = split_train_test(full, cfg.test_fraction, cfg.master_seed);
  if (cfg.dataset.normalize) {
    const NormalizeStats stats = fit_normalize(train);
    train = apply_normalize(stats, train);
    test = apply_normalize(stats, test);
  }

  const std::size_t reserved = reserve_row_count(cfg, train.n);
  if (train.n - reserved < cfg.n_nodes)
    throw ConfigError("entry '" + cfg.name + "': " + std::to_string(train.n) +
                      " training rows cannot cover " + std::to_string(cfg.n_nodes) + " nodes");

  PreparedData out;
  out.spec = spec_for(train);
  out.train = std::move(train);
  out.test = std::move(test);
  return out;
}

MetricsSeries run_repetition(const ExperimentConfig& cfg, const PreparedData& data,
                             std::size_t rep) {
  const std::uint64_t rep_seed = repetition_seed(cfg, rep);

  // Partition the training rows; with churn scheduled, hold back a reserve
  // pool that only joining nodes draw from.
  std::vector<std::size_t> rows(data.train.n);
  std::iota(rows.begin(), rows.end(), 0);
  ChurnState churn;
  churn.next_id = static_cast<NodeId>(cfg.n_nodes);
  const std::size_t reserved = reserve_row_count(cfg, data.train.n);
  if (reserved > 0) {
    Rng rr(derive_seed(rep_seed, {seed_tag::kReserve}));
    rr.shuffle(rows);
    churn.reserve.assign(rows.begin(), rows.begin() + static_cast<long>(reserved));
    rows.erase(rows.begin(), rows.begin() + static_cast<long>(reserved));
  }
  churn.shard_target = std::max<std::size_t>(1, rows.size() / cfg.n_nodes);
  auto groups =
      partition_indices(std::move(rows), cfg.n_nodes, derive_seed(rep_seed, {seed_tag::kPartition}));

  World w;
  w.rep_seed = rep_seed;
  w.hyper = cfg.hyper;
  w.dynamic = cfg.topology == TopologyKind::Elevator;

  const ModelParams init = init_params(data.spec, rep_seed);
  for (std::size_t i = 0; i < cfg.n_nodes; ++i) {
    NodeState st;
    st.model = init;
    st.shard = DataShard{static_cast<NodeId>(i), &data.train, std::move(groups[i])};
    w.nodes.emplace(static_cast<NodeId>(i), std::move(st));
  }

  if (w.dynamic) {
    w.overlay = ElevatorOverlay(cfg.h, cfg.cache_c, rep_seed);
    w.overlay.bootstrap(gen_kregular(cfg.n_nodes, cfg.cache_c, rep_seed));
  } else {
    w.static_graph = build_static_topology(cfg, rep_seed);
  }

  auto protocol = make_protocol(cfg);

  MetricsSeries series;
  series.seed = rep_seed;
  series.config_hash = fnv1a64(config_to_json(cfg));
  series.records.reserve(cfg.cycles);

  // Events scheduled at cycle 0 fire before the first cycle.
  w.refresh_graph();
  for (const FaultEvent& ev : cfg.faults.events)
    if (ev.kind != FaultEvent::Kind::ChurnWindow && ev.cycle == 0) apply_crash(w, ev);

  std::uint64_t prev_sent = 0;
  std::uint64_t prev_dropped = 0;
  int last_diameter = kUnreachable;

  for (std::uint64_t cycle = 1; cycle <= cfg.cycles; ++cycle) {
    w.cycle = cycle;
    if (w.dynamic)
      for (std::size_t e = 0; e < cfg.elevator_steps; ++e) w.overlay.run_cycle();
    w.refresh_graph();

    bool changed = false;
    for (const FaultEvent& ev : cfg.faults.events) {
      if (ev.kind == FaultEvent::Kind::ChurnWindow) {
        if (cycle >= ev.start_cycle && cycle <= ev.end_cycle) {
          apply_churn(w, ev, data, churn);
          changed = true;
        }
      } else if (ev.cycle == cycle) {
        apply_crash(w, ev);
        changed = true;
      }
    }
    if (changed) w.refresh_graph();

    protocol->step(w);

    MetricsRecord rec;
    rec.cycle = cycle;
    double acc = 0.0;
    for (const auto& [id, st] : w.nodes) acc += evaluate(st.model, data.test);
    rec.accuracy = w.nodes.empty() ? 0.0 : acc / static_cast<double>(w.nodes.size());
    rec.live_nodes = w.nodes.size();
    rec.hub_count = w.current_hubs.size();
    rec.msgs_sent = w.bus.total_sent() - prev_sent;
    rec.msgs_dropped = w.bus.total_dropped() - prev_dropped;
    prev_sent = w.bus.total_sent();
    prev_dropped = w.bus.total_dropped();
    if ((cycle - 1) % cfg.diameter_every == 0) last_diameter = graph_diameter(w.current_graph);
    rec.diameter = last_diameter;
    series.records.push_back(rec);
  }
  return series;
}

RunResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs) {
  cfg.validate();
  const PreparedData data = prepare_data(cfg);

  std::vector<MetricsSeries> reps(cfg.repetitions);
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, cfg.repetitions));
  if (workers == 1) {
    for (std::size_t r = 0; r < cfg.repetitions; ++r) reps[r] = run_repetition(cfg, data, r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          while (true) {
            const std::size_t r = next.fetch_add(1);
            if (r >= reps.size()) break;
            reps[r] = run_repetition(cfg, data, r);
          }
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  RunResult result;
  result.mean.reserve(cfg.cycles);
  const auto n = static_cast<double>(reps.size());
  for (std::size_t c = 0; c < cfg.cycles; ++c) {
    MeanRecord m;
    m.cycle = c + 1;
    for (const MetricsSeries& srs : reps) {
      const MetricsRecord& r = srs.records[c];
      m.accuracy += r.accuracy;
      m.live_nodes += static_cast<double>(r.live_nodes);
      m.hub_count += static_cast<double>(r.hub_count);
      m.msgs_sent += static_cast<double>(r.msgs_sent);
      m.msgs_dropped += static_cast<double>(r.msgs_dropped);
      m.diameter += static_cast<double>(r.diameter);
    }
    m.accuracy /= n;
    m.live_nodes /= n;
    m.hub_count /= n;
    m.msgs_sent /= n;
    m.msgs_dropped /= n;
    m.diameter /= n;
    result.mean.push_back(m);
  }
  result.repetitions = std::move(reps);
  return result;
}

std::vector<OverlaySnapshot> run_overlay_only(const ExperimentConfig& cfg, std::size_t cycles) {
  cfg.validate();
  if (cfg.topology != TopologyKind::Elevator)
    throw ConfigError("entry '" + cfg.name +
                      "': overlay inspection requires a dynamic topology (elevator)");
  const std::uint64_t rep_seed = repetition_seed(cfg, 0);
  ElevatorOverlay overlay(cfg.h, cfg.cache_c, rep_seed);
  overlay.bootstrap(gen_kregular(cfg.n_nodes, cfg.cache_c, rep_seed));

  std::vector<OverlaySnapshot> out;
  out.reserve(cycles);
  for (std::uint64_t t = 1; t <= cycles; ++t) {
    overlay.run_cycle();
    OverlaySnapshot snap;
    snap.cycle = t;
    snap.graph = overlay.graph();
    snap.hubs = detect_hubs(snap.graph);
    snap.diameter = graph_diameter(snap.graph);
    out.push_back(std::move(snap));
  }
  return out;
}

}  // namespace healsim

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "healsim/dataset.hpp"
#include "healsim/graph.hpp"
#include "healsim/model.hpp"
#include "healsim/types.hpp"

namespace healsim {

enum class ProtocolKind { Heal, FedAvg, Gaia, Gossip, Epidemic };
enum class TopologyKind { Elevator, Star, MultiStar, Ring, KRegular, Chord, Complete };

const char* to_string(ProtocolKind p);
const char* to_string(TopologyKind t);

struct DatasetSource {
  enum class Kind { Csv, Synthetic };
  Kind kind = Kind::Synthetic;

  // csv
  std::string path;
  int label_column = -1;  // negative = last column
  bool header = false;

  // synthetic
  std::size_t n = 1000;
  std::size_t dim = 10;
  std::size_t classes = 2;
  double separation = 4.0;

  bool normalize = true;  // fit on train, apply to train and test
};

struct FaultEvent {
  enum class Kind { CrashFractionUniform, CrashNodes, CrashAllHubs, CrashHubs, ChurnWindow };
  Kind kind = Kind::CrashFractionUniform;

  std::uint64_t cycle = 0;  // trigger cycle (ChurnWindow uses start/end below)
  double fraction = 0.0;    // CrashFractionUniform
  std::vector<NodeId> nodes;  // CrashNodes
  std::size_t count = 1;      // CrashHubs: how many current hubs to crash

  // ChurnWindow: every cycle in [start_cycle, end_cycle], remove
  // ceil(rate * live) nodes and add as many fresh ones, each connected to
  // new_node_degree uniformly chosen live peers.
  double rate = 0.0;
  std::uint64_t start_cycle = 0;
  std::uint64_t end_cycle = 0;
  std::size_t new_node_degree = 20;
};

struct FaultSchedule {
  std::vector<FaultEvent> events;

  bool churn_scheduled() const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProtocolKind protocol = ProtocolKind::Heal;
  TopologyKind topology = TopologyKind::Elevator;
  std::size_t n_nodes = 100;
  std::size_t h = 5;   // hubs (elevator) or servers (multi-star)
  std::size_t s = 1;   // hubs each client sends to (HEAL)
  std::size_t cache_c = 20;    // elevator cache size; also its bootstrap degree
  std::size_t topology_k = 20; // degree of the k-regular static topology
  std::size_t cycles = 1000;
  std::size_t repetitions = 5;
  std::uint64_t master_seed = 1;
  Hyperparams hyper;
  DatasetSource dataset;
  double test_fraction = 0.2;
  FaultSchedule faults;
  bool weighted_hub_average = false;
  std::size_t diameter_every = 10;   // sample the diameter every k cycles
  std::size_t elevator_steps = 1;    // overlay cycles per learning cycle
  double churn_reserve_fraction = 0.1;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct MetricsRecord {
  std::uint64_t cycle = 0;
  double accuracy = 0.0;
  std::size_t live_nodes = 0;
  std::size_t hub_count = 0;
  std::uint64_t msgs_sent = 0;     // this cycle
  std::uint64_t msgs_dropped = 0;  // this cycle
  int diameter = kUnreachable;     // last sampled value
};

struct MetricsSeries {
  std::uint64_t seed = 0;  // repetition seed
  std::uint64_t config_hash = 0;
  std::vector<MetricsRecord> records;  // one per cycle
};

/// Pointwise arithmetic mean over repetitions.
struct MeanRecord {
  std::uint64_t cycle = 0;
  double accuracy = 0.0;
  double live_nodes = 0.0;
  double hub_count = 0.0;
  double msgs_sent = 0.0;
  double msgs_dropped = 0.0;
  double diameter = 0.0;
};

struct RunResult {
  std::vector<MetricsSeries> repetitions;
  std::vector<MeanRecord> mean;
};

/// Train/test split shared by every repetition of one experiment.
struct PreparedData {
  Dataset train;
  Dataset test;
  ModelSpec spec;
};

/// Loads (or generates) the dataset, splits, and normalizes with train-set
/// statistics. CSV paths resolve in order: as given, under $HEALSIM_DATA_DIR,
/// under ./data.
PreparedData prepare_data(const ExperimentConfig& cfg);

std::uint64_t repetition_seed(const ExperimentConfig& cfg, std::size_t rep);

MetricsSeries run_repetition(const ExperimentConfig& cfg, const PreparedData& data,
                             std::size_t rep);

/// Runs all repetitions (in parallel when jobs > 1; results are identical
/// for any job count) and appends the pointwise mean series.
RunResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1);

/// FNV-1a over the canonical config serialization.
std::uint64_t fnv1a64(const std::string& text);

struct OverlaySnapshot {
  std::uint64_t cycle = 0;
  DirectedGraph graph;
  std::vector<NodeId> hubs;
  int diameter = kUnreachable;
};

/// Runs the overlay alone (no learning) for the given number of cycles,
/// returning one snapshot per cycle. Requires a dynamic topology.
std::vector<OverlaySnapshot> run_overlay_only(const ExperimentConfig& cfg, std::size_t cycles);

}  // namespace healsim

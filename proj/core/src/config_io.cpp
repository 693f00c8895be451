#include "healsim/config_io.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "healsim/errors.hpp"

namespace healsim {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kToolName = "healsim";
constexpr const char* kToolVersion = "0.1.0";

[[noreturn]] void bad(const std::string& ctx, const std::string& msg) {
  throw ConfigError(ctx + ": " + msg);
}

void deep_merge(json& base, const json& patch) {
  if (!patch.is_object() || !base.is_object()) {
    base = patch;
    return;
  }
  for (const auto& [key, value] : patch.items()) {
    if (base.contains(key))
      deep_merge(base[key], value);
    else
      base[key] = value;
  }
}

void check_keys(const json& obj, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&key](const char* k) { return key == k; }) == allowed.end())
      bad(ctx, "unknown field '" + key + "'");
  }
}

std::string get_string(const json& obj, const char* key, const std::string& ctx,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) bad(ctx, std::string("field '") + key + "': expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& obj, const char* key, const std::string& ctx, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) bad(ctx, std::string("field '") + key + "': expected a boolean");
  return v.get<bool>();
}

double get_double(const json& obj, const char* key, const std::string& ctx, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) bad(ctx, std::string("field '") + key + "': expected a number");
  return v.get<double>();
}

std::uint64_t get_u64(const json& obj, const char* key, const std::string& ctx,
                      std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0))
    bad(ctx, std::string("field '") + key + "': expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::size_t get_size(const json& obj, const char* key, const std::string& ctx,
                     std::size_t fallback) {
  return static_cast<std::size_t>(get_u64(obj, key, ctx, fallback));
}

int get_int(const json& obj, const char* key, const std::string& ctx, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) bad(ctx, std::string("field '") + key + "': expected an integer");
  return v.get<int>();
}

ProtocolKind parse_protocol(const std::string& text, const std::string& ctx) {
  if (text == "heal") return ProtocolKind::Heal;
  if (text == "fedavg") return ProtocolKind::FedAvg;
  if (text == "gaia") return ProtocolKind::Gaia;
  if (text == "gossip") return ProtocolKind::Gossip;
  if (text == "epidemic") return ProtocolKind::Epidemic;
  bad(ctx, "field 'protocol': unknown value '" + text +
               "' (expected heal, fedavg, gaia, gossip, or epidemic)");
}

TopologyKind parse_topology(const std::string& text, const std::string& ctx) {
  if (text == "elevator") return TopologyKind::Elevator;
  if (text == "star") return TopologyKind::Star;
  if (text == "multistar") return TopologyKind::MultiStar;
  if (text == "ring") return TopologyKind::Ring;
  if (text == "kregular") return TopologyKind::KRegular;
  if (text == "chord") return TopologyKind::Chord;
  if (text == "complete") return TopologyKind::Complete;
  bad(ctx, "field 'topology': unknown value '" + text +
               "' (expected elevator, star, multistar, ring, kregular, chord, or complete)");
}

DatasetSource parse_dataset(const json& obj, const std::string& outer_ctx, DatasetSource base) {
  const std::string ctx = outer_ctx + ": field 'dataset'";
  if (!obj.is_object()) bad(outer_ctx, "field 'dataset': expected an object");
  check_keys(obj, ctx,
             {"kind", "path", "label_column", "header", "n", "dim", "classes", "separation",
              "normalize"});
  if (obj.contains("kind")) {
    const std::string kind = get_string(obj, "kind", ctx, "");
    if (kind == "csv")
      base.kind = DatasetSource::Kind::Csv;
    else if (kind == "synthetic")
      base.kind = DatasetSource::Kind::Synthetic;
    else
      bad(ctx, "field 'kind': unknown value '" + kind + "' (expected csv or synthetic)");
  }
  base.path = get_string(obj, "path", ctx, base.path);
  base.label_column = get_int(obj, "label_column", ctx, base.label_column);
  base.header = get_bool(obj, "header", ctx, base.header);
  base.n = get_size(obj, "n", ctx, base.n);
  base.dim = get_size(obj, "dim", ctx, base.dim);
  base.classes = get_size(obj, "classes", ctx, base.classes);
  base.separation = get_double(obj, "separation", ctx, base.separation);
  base.normalize = get_bool(obj, "normalize", ctx, base.normalize);
  return base;
}

FaultEvent parse_fault(const json& obj, const std::string& outer_ctx, std::size_t index,
                       std::size_t default_degree) {
  const std::string ctx = outer_ctx + ": field 'faults[" + std::to_string(index) + "]'";
  if (!obj.is_object()) bad(ctx, "expected an object");
  const std::string kind = get_string(obj, "kind", ctx, "");
  if (kind.empty()) bad(ctx, "field 'kind' is required");

  FaultEvent ev;
  ev.new_node_degree = default_degree;
  if (kind == "crash_fraction") {
    check_keys(obj, ctx, {"kind", "cycle", "fraction"});
    ev.kind = FaultEvent::Kind::CrashFractionUniform;
    ev.cycle = get_u64(obj, "cycle", ctx, 0);
    ev.fraction = get_double(obj, "fraction", ctx, 0.0);
  } else if (kind == "crash_nodes") {
    check_keys(obj, ctx, {"kind", "cycle", "nodes"});
    ev.kind = FaultEvent::Kind::CrashNodes;
    ev.cycle = get_u64(obj, "cycle", ctx, 0);
    if (!obj.contains("nodes") || !obj.at("nodes").is_array())
      bad(ctx, "field 'nodes': expected an array of node ids");
    for (const json& v : obj.at("nodes")) {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        bad(ctx, "field 'nodes': expected non-negative integers");
      ev.nodes.push_back(static_cast<NodeId>(v.get<std::uint64_t>()));
    }
  } else if (kind == "crash_all_hubs") {
    check_keys(obj, ctx, {"kind", "cycle"});
    ev.kind = FaultEvent::Kind::CrashAllHubs;
    ev.cycle = get_u64(obj, "cycle", ctx, 0);
  } else if (kind == "crash_hubs") {
    check_keys(obj, ctx, {"kind", "cycle", "count"});
    ev.kind = FaultEvent::Kind::CrashHubs;
    ev.cycle = get_u64(obj, "cycle", ctx, 0);
    ev.count = get_size(obj, "count", ctx, 1);
  } else if (kind == "churn") {
    check_keys(obj, ctx, {"kind", "start_cycle", "end_cycle", "rate", "new_node_degree"});
    ev.kind = FaultEvent::Kind::ChurnWindow;
    ev.start_cycle = get_u64(obj, "start_cycle", ctx, 0);
    ev.end_cycle = get_u64(obj, "end_cycle", ctx, 0);
    ev.rate = get_double(obj, "rate", ctx, 0.0);
    ev.new_node_degree = get_size(obj, "new_node_degree", ctx, ev.new_node_degree);
  } else {
    bad(ctx, "field 'kind': unknown value '" + kind +
                 "' (expected crash_fraction, crash_nodes, crash_all_hubs, crash_hubs, or churn)");
  }
  return ev;
}

ExperimentConfig config_from_json(const json& obj, std::size_t index) {
  std::string ctx = "config entry " + std::to_string(index);
  if (!obj.is_object()) bad(ctx, "expected an object");
  ExperimentConfig cfg;
  cfg.name = get_string(obj, "name", ctx, "");
  if (cfg.name.empty()) bad(ctx, "field 'name' is required and must be non-empty");
  ctx = "config entry '" + cfg.name + "'";

  check_keys(obj, ctx,
             {"name", "protocol", "topology", "n_nodes", "h", "s", "cache_c", "topology_k",
              "cycles", "repetitions", "master_seed", "hyperparams", "dataset", "test_fraction",
              "faults", "weighted_hub_average", "diameter_every", "elevator_steps",
              "churn_reserve_fraction"});

  if (obj.contains("protocol"))
    cfg.protocol = parse_protocol(get_string(obj, "protocol", ctx, ""), ctx);
  if (obj.contains("topology"))
    cfg.topology = parse_topology(get_string(obj, "topology", ctx, ""), ctx);
  cfg.n_nodes = get_size(obj, "n_nodes", ctx, cfg.n_nodes);
  cfg.h = get_size(obj, "h", ctx, cfg.h);
  if (obj.contains("s")) {
    const json& sv = obj.at("s");
    if (sv.is_string()) {
      if (sv.get<std::string>() != "half")
        bad(ctx, "field 's': expected an integer or the string \"half\"");
      cfg.s = std::max<std::size_t>(1, cfg.h / 2);
    } else {
      cfg.s = get_size(obj, "s", ctx, cfg.s);
    }
  }
  cfg.cache_c = get_size(obj, "cache_c", ctx, cfg.cache_c);
  cfg.topology_k = get_size(obj, "topology_k", ctx, cfg.topology_k);
  cfg.cycles = get_u64(obj, "cycles", ctx, cfg.cycles);
  cfg.repetitions = get_size(obj, "repetitions", ctx, cfg.repetitions);
  cfg.master_seed = get_u64(obj, "master_seed", ctx, cfg.master_seed);

  if (obj.contains("hyperparams")) {
    const json& hp = obj.at("hyperparams");
    const std::string hctx = ctx + ": field 'hyperparams'";
    if (!hp.is_object()) bad(ctx, "field 'hyperparams': expected an object");
    check_keys(hp, hctx, {"learning_rate", "weight_decay", "batch_size"});
    cfg.hyper.learning_rate = get_double(hp, "learning_rate", hctx, cfg.hyper.learning_rate);
    cfg.hyper.weight_decay = get_double(hp, "weight_decay", hctx, cfg.hyper.weight_decay);
    cfg.hyper.batch_size = get_size(hp, "batch_size", hctx, cfg.hyper.batch_size);
  }
  if (obj.contains("dataset")) cfg.dataset = parse_dataset(obj.at("dataset"), ctx, cfg.dataset);
  cfg.test_fraction = get_double(obj, "test_fraction", ctx, cfg.test_fraction);
  if (obj.contains("faults")) {
    const json& fl = obj.at("faults");
    if (!fl.is_array()) bad(ctx, "field 'faults': expected an array");
    cfg.faults.events.clear();
    std::size_t i = 0;
    for (const json& ev : fl) cfg.faults.events.push_back(parse_fault(ev, ctx, i++, 20));
  }
  cfg.weighted_hub_average = get_bool(obj, "weighted_hub_average", ctx, cfg.weighted_hub_average);
  cfg.diameter_every = get_u64(obj, "diameter_every", ctx, cfg.diameter_every);
  cfg.elevator_steps = get_size(obj, "elevator_steps", ctx, cfg.elevator_steps);
  cfg.churn_reserve_fraction =
      get_double(obj, "churn_reserve_fraction", ctx, cfg.churn_reserve_fraction);
  return cfg;
}

ordered_json fault_to_json(const FaultEvent& ev) {
  ordered_json out;
  switch (ev.kind) {
    case FaultEvent::Kind::CrashFractionUniform:
      out["kind"] = "crash_fraction";
      out["cycle"] = ev.cycle;
      out["fraction"] = ev.fraction;
      break;
    case FaultEvent::Kind::CrashNodes:
      out["kind"] = "crash_nodes";
      out["cycle"] = ev.cycle;
      out["nodes"] = ev.nodes;
      break;
    case FaultEvent::Kind::CrashAllHubs:
      out["kind"] = "crash_all_hubs";
      out["cycle"] = ev.cycle;
      break;
    case FaultEvent::Kind::CrashHubs:
      out["kind"] = "crash_hubs";
      out["cycle"] = ev.cycle;
      out["count"] = ev.count;
      break;
    case FaultEvent::Kind::ChurnWindow:
      out["kind"] = "churn";
      out["start_cycle"] = ev.start_cycle;
      out["end_cycle"] = ev.end_cycle;
      out["rate"] = ev.rate;
      out["new_node_degree"] = ev.new_node_degree;
      break;
  }
  return out;
}

ordered_json config_to_ordered_json(const ExperimentConfig& cfg) {
  ordered_json out;
  out["name"] = cfg.name;
  out["protocol"] = to_string(cfg.protocol);
  out["topology"] = to_string(cfg.topology);
  out["n_nodes"] = cfg.n_nodes;
  out["h"] = cfg.h;
  out["s"] = cfg.s;
  out["cache_c"] = cfg.cache_c;
  out["topology_k"] = cfg.topology_k;
  out["cycles"] = cfg.cycles;
  out["repetitions"] = cfg.repetitions;
  out["master_seed"] = cfg.master_seed;
  out["hyperparams"] = {{"learning_rate", cfg.hyper.learning_rate},
                        {"weight_decay", cfg.hyper.weight_decay},
                        {"batch_size", cfg.hyper.batch_size}};
  ordered_json ds;
  ds["kind"] = cfg.dataset.kind == DatasetSource::Kind::Csv ? "csv" : "synthetic";
  if (cfg.dataset.kind == DatasetSource::Kind::Csv) {
    ds["path"] = cfg.dataset.path;
    ds["label_column"] = cfg.dataset.label_column;
    ds["header"] = cfg.dataset.header;
  } else {
    ds["n"] = cfg.dataset.n;
    ds["dim"] = cfg.dataset.dim;
    ds["classes"] = cfg.dataset.classes;
    ds["separation"] = cfg.dataset.separation;
  }
  ds["normalize"] = cfg.dataset.normalize;
  out["dataset"] = std::move(ds);
  out["test_fraction"] = cfg.test_fraction;
  ordered_json faults = ordered_json::array();
  for (const FaultEvent& ev : cfg.faults.events) faults.push_back(fault_to_json(ev));
  out["faults"] = std::move(faults);
  out["weighted_hub_average"] = cfg.weighted_hub_average;
  out["diameter_every"] = cfg.diameter_every;
  out["elevator_steps"] = cfg.elevator_steps;
  out["churn_reserve_fraction"] = cfg.churn_reserve_fraction;
  return out;
}

std::string iso_utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hash_hex(std::uint64_t value) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << value;
  return os.str();
}

}  // namespace

ExperimentFile parse_experiment_json(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(origin + ": top level must be an object");
  check_keys(doc, origin, {"defaults", "experiments"});

  json defaults = json::object();
  if (doc.contains("defaults")) {
    defaults = doc.at("defaults");
    if (!defaults.is_object()) throw ConfigError(origin + ": field 'defaults': expected an object");
  }
  if (!doc.contains("experiments") || !doc.at("experiments").is_array() ||
      doc.at("experiments").empty())
    throw ConfigError(origin + ": field 'experiments': expected a non-empty array");

  ExperimentFile file;
  std::set<std::string> names;
  std::size_t index = 0;
  for (const json& raw : doc.at("experiments")) {
    json merged = defaults;
    deep_merge(merged, raw);
    ExperimentConfig cfg = config_from_json(merged, index++);
    if (!names.insert(cfg.name).second)
      throw ConfigError(origin + ": duplicate experiment name '" + cfg.name + "'");
    cfg.validate();
    file.experiments.push_back(std::move(cfg));
  }
  return file;
}

ExperimentFile load_experiment_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_json(buf.str(), path);
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) {
  return config_to_ordered_json(cfg).dump(indent);
}

std::string manifest_json(const ExperimentConfig& cfg,
                          const std::vector<std::uint64_t>& rep_seeds, double wall_seconds) {
  ordered_json out;
  out["name"] = cfg.name;
  out["generator"] = {{"name", kToolName}, {"version", kToolVersion}};
  out["created_utc"] = iso_utc_now();
  out["config"] = config_to_ordered_json(cfg);
  out["config_hash"] = hash_hex(fnv1a64(config_to_json(cfg)));
  out["repetition_seeds"] = rep_seeds;
  out["wall_seconds"] = wall_seconds;
  return out.dump(2) + "\n";
}

}  // namespace healsim

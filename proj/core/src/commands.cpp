#include "healsim/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "healsim/config_io.hpp"
#include "healsim/csv.hpp"
#include "healsim/errors.hpp"
#include "healsim/experiment.hpp"

namespace healsim {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

/// Refuses to clobber existing outputs unless forced. Checks every path up
/// front so a run never stops halfway with partial results.
void check_collisions(const std::vector<fs::path>& paths, bool force) {
  if (force) return;
  std::vector<std::string> hits;
  for (const fs::path& p : paths) {
    std::error_code ec;
    if (fs::exists(p, ec)) hits.push_back(p.string());
  }
  if (hits.empty()) return;
  std::string msg = "output already exists (use --force to overwrite):";
  for (const auto& h : hits) msg += "\n  " + h;
  throw IoError(msg);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<std::uint64_t> seeds_for(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(cfg.repetitions);
  for (std::size_t r = 0; r < cfg.repetitions; ++r) seeds.push_back(repetition_seed(cfg, r));
  return seeds;
}

int report(const std::exception& e, int code) {
  std::cerr << "error: " << e.what() << "\n";
  return code;
}

}  // namespace

int cmd_run(const RunOptions& opt) {
  try {
    ExperimentFile file = load_experiment_file(opt.config_path);
    if (opt.seed_override) {
      for (ExperimentConfig& cfg : file.experiments) cfg.master_seed = *opt.seed_override;
    }
    ensure_out_dir(opt.out_dir);

    std::vector<fs::path> outputs;
    for (const ExperimentConfig& cfg : file.experiments) {
      outputs.emplace_back(fs::path(opt.out_dir) / (cfg.name + ".metrics.csv"));
      outputs.emplace_back(fs::path(opt.out_dir) / (cfg.name + ".mean.csv"));
      outputs.emplace_back(fs::path(opt.out_dir) / (cfg.name + ".manifest.json"));
    }
    check_collisions(outputs, opt.force);

    for (const ExperimentConfig& cfg : file.experiments) {
      std::cout << "run '" << cfg.name << "': protocol=" << to_string(cfg.protocol)
                << " topology=" << to_string(cfg.topology) << " n=" << cfg.n_nodes
                << " cycles=" << cfg.cycles << " reps=" << cfg.repetitions
                << " seed=" << cfg.master_seed << " jobs=" << opt.jobs << "\n";
      const auto t0 = std::chrono::steady_clock::now();
      const RunResult result = run_experiment(cfg, opt.jobs);
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

      std::ostringstream metrics;
      write_metrics_csv(metrics, result);
      std::ostringstream mean;
      write_mean_csv(mean, result.mean);

      const fs::path base = fs::path(opt.out_dir) / cfg.name;
      write_file(base.string() + ".metrics.csv", metrics.str());
      write_file(base.string() + ".mean.csv", mean.str());
      write_file(base.string() + ".manifest.json", manifest_json(cfg, seeds_for(cfg), wall));
      std::cout << "  wrote " << base.string() << ".metrics.csv (+ mean, manifest), "
                << format_double(wall) << "s\n";
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    return report(e, kExitConfig);
  } catch (const ParseError& e) {
    return report(e, kExitConfig);
  } catch (const IoError& e) {
    return report(e, kExitConfig);
  } catch (const std::exception& e) {
    return report(e, kExitRuntime);
  }
}

namespace {

/// Applies one swept value to a cloned config. Throws ConfigError on an
/// unknown parameter or a malformed value.
ExperimentConfig apply_sweep_value(const ExperimentConfig& base, const std::string& param,
                                   const std::string& value) {
  ExperimentConfig cfg = base;
  cfg.name = base.name + "_" + param + "_" + value;
  auto parse_count = [&](const std::string& text) -> std::size_t {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(text, &pos);
    } catch (const std::exception&) {
      throw ConfigError("sweep value '" + text + "' is not an integer");
    }
    if (pos != text.size()) throw ConfigError("sweep value '" + text + "' is not an integer");
    return static_cast<std::size_t>(v);
  };
  if (param == "h") {
    cfg.h = parse_count(value);
  } else if (param == "s") {
    cfg.s = parse_count(value);
  } else if (param == "n_nodes") {
    cfg.n_nodes = parse_count(value);
  } else if (param == "cycles") {
    cfg.cycles = parse_count(value);
  } else if (param == "learning_rate") {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &pos);
    } catch (const std::exception&) {
      throw ConfigError("sweep value '" + value + "' is not a number");
    }
    if (pos != value.size()) throw ConfigError("sweep value '" + value + "' is not a number");
    cfg.hyper.learning_rate = v;
  } else {
    throw ConfigError("unknown sweep parameter '" + param +
                      "' (expected h, s, n_nodes, cycles, or learning_rate)");
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int cmd_sweep(const SweepOptions& opt) {
  try {
    if (opt.values.empty()) throw ConfigError("sweep needs at least one --values entry");
    ExperimentFile file = load_experiment_file(opt.config_path);
    ExperimentConfig base = file.experiments.front();
    if (file.experiments.size() > 1)
      std::cerr << "note: config has " << file.experiments.size()
                << " entries; sweep uses the first ('" << base.name << "')\n";
    if (opt.seed_override) base.master_seed = *opt.seed_override;

    // Validate the parameter name up front so a typo fails before any run.
    if (opt.param != "h" && opt.param != "s" && opt.param != "n_nodes" &&
        opt.param != "cycles" && opt.param != "learning_rate")
      throw ConfigError("unknown sweep parameter '" + opt.param +
                        "' (expected h, s, n_nodes, cycles, or learning_rate)");

    ensure_out_dir(opt.out_dir);
    const fs::path csv_path = fs::path(opt.out_dir) / (base.name + ".sweep.csv");
    const fs::path manifest_path = fs::path(opt.out_dir) / (base.name + ".sweep.manifest.json");
    check_collisions({csv_path, manifest_path}, opt.force);

    std::ostringstream csv;
    write_sweep_header(csv);
    std::vector<std::pair<std::string, std::string>> skipped;
    std::ostringstream manifest;
    manifest << "{\n  \"param\": \"" << opt.param << "\",\n  \"runs\": [\n";
    bool first_run = true;

    for (const std::string& value : opt.values) {
      ExperimentConfig cfg;
      try {
        cfg = apply_sweep_value(base, opt.param, value);
      } catch (const ConfigError& e) {
        skipped.emplace_back(value, e.what());
        continue;
      }
      std::cout << "sweep " << opt.param << "=" << value << " ('" << cfg.name << "')\n";
      const RunResult result = run_experiment(cfg, opt.jobs);
      write_sweep_rows(csv, opt.param, value, result);
      if (!first_run) manifest << ",\n";
      first_run = false;
      manifest << "    {\"value\": \"" << value << "\", \"name\": \"" << cfg.name
               << "\", \"master_seed\": " << cfg.master_seed << "}";
    }
    manifest << "\n  ]\n}\n";

    if (skipped.size() == opt.values.size())
      throw ConfigError("every sweep value was invalid; nothing to run");

    write_file(csv_path, csv.str());
    write_file(manifest_path, manifest.str());
    std::cout << "wrote " << csv_path.string() << "\n";

    if (!skipped.empty()) {
      std::cerr << "skipped " << skipped.size() << " invalid value(s):\n";
      for (const auto& [value, reason] : skipped)
        std::cerr << "  " << opt.param << "=" << value << ": " << reason << "\n";
      return kExitRuntime;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    return report(e, kExitConfig);
  } catch (const ParseError& e) {
    return report(e, kExitConfig);
  } catch (const IoError& e) {
    return report(e, kExitConfig);
  } catch (const std::exception& e) {
    return report(e, kExitRuntime);
  }
}

int cmd_inspect_overlay(const InspectOptions& opt) {
  try {
    if (opt.cycles < 1) throw ConfigError("--cycles must be >= 1");
    ExperimentFile file = load_experiment_file(opt.config_path);
    if (opt.seed_override) {
      for (ExperimentConfig& cfg : file.experiments) cfg.master_seed = *opt.seed_override;
    }
    for (const ExperimentConfig& cfg : file.experiments) {
      if (cfg.topology != TopologyKind::Elevator)
        throw ConfigError("entry '" + cfg.name + "': topology '" +
                          to_string(cfg.topology) +
                          "' is static; inspect-overlay needs the elevator topology");
    }
    ensure_out_dir(opt.out_dir);

    std::vector<fs::path> outputs;
    for (const ExperimentConfig& cfg : file.experiments) {
      for (std::size_t t = 1; t <= opt.cycles; ++t) {
        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "_cycle_%04zu", t);
        outputs.emplace_back(fs::path(opt.out_dir) / (cfg.name + suffix + ".edges"));
        outputs.emplace_back(fs::path(opt.out_dir) / (cfg.name + suffix + ".json"));
      }
    }
    check_collisions(outputs, opt.force);

    for (const ExperimentConfig& cfg : file.experiments) {
      std::cout << "inspect '" << cfg.name << "': n=" << cfg.n_nodes << " h=" << cfg.h
                << " c=" << cfg.cache_c << " cycles=" << opt.cycles << "\n";
      const auto snaps = run_overlay_only(cfg, opt.cycles);
      for (const OverlaySnapshot& snap : snaps) {
        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "_cycle_%04zu",
                      static_cast<std::size_t>(snap.cycle));
        const fs::path base = fs::path(opt.out_dir) / (cfg.name + suffix);

        std::ostringstream edges;
        write_edge_list(edges, snap.graph);
        write_file(base.string() + ".edges", edges.str());

        std::ostringstream meta;
        meta << "{\n  \"cycle\": " << snap.cycle << ",\n  \"hubs\": [";
        for (std::size_t i = 0; i < snap.hubs.size(); ++i) {
          if (i > 0) meta << ", ";
          meta << snap.hubs[i];
        }
        meta << "],\n  \"diameter\": " << snap.diameter << "\n}\n";
        write_file(base.string() + ".json", meta.str());
      }
      std::cout << "  wrote " << snaps.size() << " edge lists into " << opt.out_dir << "\n";
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    return report(e, kExitConfig);
  } catch (const ParseError& e) {
    return report(e, kExitConfig);
  } catch (const IoError& e) {
    return report(e, kExitConfig);
  } catch (const std::exception& e) {
    return report(e, kExitRuntime);
  }
}

}  // namespace healsim

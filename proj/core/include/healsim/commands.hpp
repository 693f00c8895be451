#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace healsim {

struct RunOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  std::size_t jobs = 1;
  bool force = false;
};

struct SweepOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  std::size_t jobs = 1;
  bool force = false;
  std::string param;
  std::vector<std::string> values;
};

struct InspectOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  bool force = false;
  std::size_t cycles = 10;
};

/// Runs every experiment in the config; writes <name>.metrics.csv,
/// <name>.mean.csv and <name>.manifest.json into out_dir.
int cmd_run(const RunOptions& opt);

/// Clones the first experiment across the swept values of one parameter and
/// writes a combined long CSV keyed by (param, value). Invalid values are
/// skipped and listed; skipping any makes the exit code nonzero.
int cmd_sweep(const SweepOptions& opt);

/// Steps the dynamic overlay alone and writes per-cycle edge lists plus JSON
/// metadata (cycle, hubs, diameter) for each experiment entry.
int cmd_inspect_overlay(const InspectOptions& opt);

}  // namespace healsim

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "healsim/experiment.hpp"

namespace healsim {

/// A parsed experiment document: every entry fully resolved and validated.
struct ExperimentFile {
  std::vector<ExperimentConfig> experiments;
};

/// Reads and parses a JSON experiment document.
///
/// Layout: an object with an optional "defaults" object and a required
/// non-empty "experiments" array. Each entry is deep-merged over the defaults
/// (entry fields win), then validated. Diagnostics name the entry and field.
ExperimentFile load_experiment_file(const std::string& path);

/// Same as load_experiment_file but from an in-memory string. `origin` names
/// the source in diagnostics.
ExperimentFile parse_experiment_json(const std::string& text, const std::string& origin);

/// Canonical JSON echo of one effective config. Field order is fixed, so the
/// string (and its hash) is stable across runs and platforms.
std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);

/// Run manifest: effective config, hash, per-repetition seeds, timing.
std::string manifest_json(const ExperimentConfig& cfg,
                          const std::vector<std::uint64_t>& rep_seeds, double wall_seconds);

}  // namespace healsim

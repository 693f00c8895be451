#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "healsim/experiment.hpp"

namespace healsim {

/// Per-cycle metrics, one row per (repetition, cycle).
/// Columns: cycle,repetition,accuracy,live_nodes,hub_count,msgs_sent,msgs_dropped,diameter
void write_metrics_csv(std::ostream& out, const RunResult& result);

/// Across-repetition means, one row per cycle.
void write_mean_csv(std::ostream& out, const std::vector<MeanRecord>& mean);

/// One sweep row set: the long format keyed by (param, value).
void write_sweep_header(std::ostream& out);
void write_sweep_rows(std::ostream& out, const std::string& param, const std::string& value,
                      const RunResult& result);

/// Stable decimal rendering used in every CSV cell (%.10g).
std::string format_double(double value);

}  // namespace healsim

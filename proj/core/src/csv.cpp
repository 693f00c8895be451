#include "healsim/csv.hpp"

#include <cstdio>

namespace healsim {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

void write_metrics_csv(std::ostream& out, const RunResult& result) {
  out << "cycle,repetition,accuracy,live_nodes,hub_count,msgs_sent,msgs_dropped,diameter\n";
  for (std::size_t r = 0; r < result.repetitions.size(); ++r) {
    for (const MetricsRecord& rec : result.repetitions[r].records) {
      out << rec.cycle << ',' << r << ',' << format_double(rec.accuracy) << ',' << rec.live_nodes
          << ',' << rec.hub_count << ',' << rec.msgs_sent << ',' << rec.msgs_dropped << ','
          << rec.diameter << '\n';
    }
  }
}

void write_mean_csv(std::ostream& out, const std::vector<MeanRecord>& mean) {
  out << "cycle,accuracy,live_nodes,hub_count,msgs_sent,msgs_dropped,diameter\n";
  for (const MeanRecord& m : mean) {
    out << m.cycle << ',' << format_double(m.accuracy) << ',' << format_double(m.live_nodes)
        << ',' << format_double(m.hub_count) << ',' << format_double(m.msgs_sent) << ','
        << format_double(m.msgs_dropped) << ',' << format_double(m.diameter) << '\n';
  }
}

void write_sweep_header(std::ostream& out) {
  out << "param,value,cycle,repetition,accuracy,live_nodes,hub_count,msgs_sent,msgs_dropped,"
         "diameter\n";
}

void write_sweep_rows(std::ostream& out, const std::string& param, const std::string& value,
                      const RunResult& result) {
  for (std::size_t r = 0; r < result.repetitions.size(); ++r) {
    for (const MetricsRecord& rec : result.repetitions[r].records) {
      out << param << ',' << value << ',' << rec.cycle << ',' << r << ','
          << format_double(rec.accuracy) << ',' << rec.live_nodes << ',' << rec.hub_count << ','
          << rec.msgs_sent << ',' << rec.msgs_dropped << ',' << rec.diameter << '\n';
    }
  }
}

}  // namespace healsim

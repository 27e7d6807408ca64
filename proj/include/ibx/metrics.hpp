#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace ibx {

// One record per episode. wall_clock_ms is kept in memory and in the run
// summary only; the JSONL serialization is fully deterministic given the
// seed, so identical runs produce byte-identical metrics files.
struct MetricsRecord {
  std::size_t episode = 0;
  std::size_t env_steps = 0;
  double intrinsic_mean = 0.0;
  double intrinsic_max = 0.0;
  double extrinsic_eval = 0.0;  // mean extrinsic return across actors
  double goal_rate = 0.0;       // fraction of actors reaching the goal
  double i_pred = 0.0;
  double i_nce = 0.0;
  double i_upper = 0.0;
  double total_loss = 0.0;
  double encoder_std = 0.0;  // collapse diagnostic
  std::size_t coverage = 0;  // cumulative unique informative states
  double wall_clock_ms = 0.0;
};

nlohmann::json metrics_to_json(const MetricsRecord& r);
MetricsRecord metrics_from_json(const nlohmann::json& j);

// append-only JSONL writer, flushed every `flush_interval` records
class MetricsWriter {
 public:
  MetricsWriter(const std::string& path, std::size_t flush_interval = 1);
  void write(const MetricsRecord& r);
  void write_error(const std::string& message, std::size_t episode);
  void close();

 private:
  std::ofstream out_;
  std::size_t flush_interval_;
  std::size_t pending_ = 0;
};

// throws ConfigError naming the line number on a malformed record
std::vector<MetricsRecord> read_metrics_file(const std::string& path);

}  // namespace ibx

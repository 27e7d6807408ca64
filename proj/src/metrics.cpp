#include "ibx/metrics.hpp"

#include "ibx/error.hpp"

namespace ibx {

nlohmann::json metrics_to_json(const MetricsRecord& r) {
  return nlohmann::json{{"episode", r.episode},
                        {"env_steps", r.env_steps},
                        {"intrinsic_mean", r.intrinsic_mean},
                        {"intrinsic_max", r.intrinsic_max},
                        {"extrinsic_eval", r.extrinsic_eval},
                        {"goal_rate", r.goal_rate},
                        {"i_pred", r.i_pred},
                        {"i_nce", r.i_nce},
                        {"i_upper", r.i_upper},
                        {"total_loss", r.total_loss},
                        {"encoder_std", r.encoder_std},
                        {"coverage", r.coverage}};
}

MetricsRecord metrics_from_json(const nlohmann::json& j) {
  MetricsRecord r;
  r.episode = j.at("episode").get<std::size_t>();
  r.env_steps = j.at("env_steps").get<std::size_t>();
  r.intrinsic_mean = j.at("intrinsic_mean").get<double>();
  r.intrinsic_max = j.at("intrinsic_max").get<double>();
  r.extrinsic_eval = j.at("extrinsic_eval").get<double>();
  r.goal_rate = j.at("goal_rate").get<double>();
  r.i_pred = j.at("i_pred").get<double>();
  r.i_nce = j.at("i_nce").get<double>();
  r.i_upper = j.at("i_upper").get<double>();
  r.total_loss = j.at("total_loss").get<double>();
  r.encoder_std = j.at("encoder_std").get<double>();
  r.coverage = j.at("coverage").get<std::size_t>();
  return r;
}

MetricsWriter::MetricsWriter(const std::string& path, std::size_t flush_interval)
    : out_(path, std::ios::trunc), flush_interval_(flush_interval == 0 ? 1 : flush_interval) {
  if (!out_) throw ConfigError("metrics writer: cannot open " + path);
}

void MetricsWriter::write(const MetricsRecord& r) {
  out_ << metrics_to_json(r).dump() << "\n";
  if (++pending_ >= flush_interval_) {
    out_.flush();
    pending_ = 0;
  }
}

void MetricsWriter::write_error(const std::string& message, std::size_t episode) {
  out_ << nlohmann::json{{"error", message}, {"episode", episode}}.dump() << "\n";
  out_.flush();
}

void MetricsWriter::close() {
  out_.flush();
  out_.close();
}

std::vector<MetricsRecord> read_metrics_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("metrics: cannot open " + path);
  std::vector<MetricsRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw ConfigError("metrics: malformed JSON at line " + std::to_string(line_no));
    }
    if (j.contains("error")) continue;  // trailing error records are not metrics
    try {
      records.push_back(metrics_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("metrics: bad record at line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return records;
}

}  // namespace ibx

#pragma once

#include <string>
#include <vector>

#include "ibx/metrics.hpp"

namespace ibx {

struct Series {
  std::string label;
  std::vector<double> values;
};

// simple polyline chart; empty series produce bare axes
void write_line_chart_svg(const std::string& title, const std::vector<Series>& series,
                          const std::string& path);
void write_metrics_csv(const std::vector<MetricsRecord>& records, const std::string& path);

// intrinsic reward, extrinsic evaluation, loss components, collapse
// diagnostic (4 SVG files) plus one CSV export
void emit_plots(const std::vector<MetricsRecord>& records, const std::string& out_dir);

}  // namespace ibx

#include "ibx/plot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "ibx/error.hpp"

namespace ibx {

namespace {

constexpr double kWidth = 640.0, kHeight = 360.0;
constexpr double kMarginLeft = 64.0, kMarginRight = 16.0;
constexpr double kMarginTop = 32.0, kMarginBottom = 32.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_line_chart_svg(const std::string& title, const std::vector<Series>& series,
                          const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("plot: cannot open " + path);

  double lo = 0.0, hi = 1.0;
  std::size_t n = 0;
  bool any = false;
  for (const Series& s : series) {
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      if (!any) {
        lo = hi = v;
        any = true;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    n = std::max(n, s.values.size());
  }
  if (!any) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }

  double plot_w = kWidth - kMarginLeft - kMarginRight;
  double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](std::size_t i) {
    return kMarginLeft + (n <= 1 ? 0.0 : plot_w * static_cast<double>(i) /
                                             static_cast<double>(n - 1));
  };
  auto sy = [&](double v) { return kMarginTop + plot_h * (1.0 - (v - lo) / (hi - lo)); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  // axes
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
      << "\" y2=\"" << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\""
      << kWidth - kMarginRight << "\" y2=\"" << kHeight - kMarginBottom
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << kMarginTop + 4
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(hi) << "</text>\n";
  out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << kHeight - kMarginBottom
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(lo) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    if (s.values.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[si % 4]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      out << fmt(sx(i)) << "," << fmt(sy(s.values[i])) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << kWidth - kMarginRight - 4 << "\" y=\""
        << kMarginTop + 14.0 * static_cast<double>(si + 1) << "\" text-anchor=\"end\" "
        << "font-size=\"11\" fill=\"" << kPalette[si % 4] << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

void write_metrics_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("plot: cannot open " + path);
  out << "episode,env_steps,intrinsic_mean,intrinsic_max,extrinsic_eval,goal_rate,"
         "i_pred,i_nce,i_upper,total_loss,encoder_std,coverage\n";
  for (const MetricsRecord& r : records) {
    out << r.episode << "," << r.env_steps << "," << fmt(r.intrinsic_mean) << ","
        << fmt(r.intrinsic_max) << "," << fmt(r.extrinsic_eval) << "," << fmt(r.goal_rate)
        << "," << fmt(r.i_pred) << "," << fmt(r.i_nce) << "," << fmt(r.i_upper) << ","
        << fmt(r.total_loss) << "," << fmt(r.encoder_std) << "," << r.coverage << "\n";
  }
}

void emit_plots(const std::vector<MetricsRecord>& records, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto col = [&](double MetricsRecord::* f) {
    std::vector<double> v;
    v.reserve(records.size());
    for (const MetricsRecord& r : records) v.push_back(r.*f);
    return v;
  };
  std::string d = out_dir + "/";
  write_line_chart_svg("intrinsic reward",
                       {{"mean", col(&MetricsRecord::intrinsic_mean)},
                        {"max", col(&MetricsRecord::intrinsic_max)}},
                       d + "intrinsic_reward.svg");
  write_line_chart_svg("extrinsic evaluation",
                       {{"return", col(&MetricsRecord::extrinsic_eval)},
                        {"goal rate", col(&MetricsRecord::goal_rate)}},
                       d + "extrinsic_eval.svg");
  write_line_chart_svg("loss components",
                       {{"i_pred", col(&MetricsRecord::i_pred)},
                        {"i_nce", col(&MetricsRecord::i_nce)},
                        {"i_upper", col(&MetricsRecord::i_upper)},
                        {"total", col(&MetricsRecord::total_loss)}},
                       d + "loss_components.svg");
  write_line_chart_svg("encoder std (collapse diagnostic)",
                       {{"encoder std", col(&MetricsRecord::encoder_std)}},
                       d + "collapse_diagnostic.svg");
  write_metrics_csv(records, d + "metrics.csv");
}

}  // namespace ibx

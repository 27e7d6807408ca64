#include "ibx/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ibx/error.hpp"

namespace ibx {

GradReport finite_difference_check(const LossFn& loss, const GradFn& analytic,
                                   const ParamSet& params, double eps, RngStream& rng,
                                   std::size_t dense_limit, std::size_t subsample) {
  if (!(eps >= 1e-7 && eps <= 1e-4)) {
    throw ConfigError("finite_difference_check: eps must lie in [1e-7, 1e-4]");
  }
  ParamSet grads = analytic(params);
  ParamSet work;
  for (const std::string& n : params.names()) work.add(n, params.at(n));

  GradReport report;
  for (const std::string& name : grads.names()) {
    const Tensor& g = grads.at(name);
    Tensor& p = work.at(name);
    std::vector<std::size_t> coords;
    if (g.numel() <= dense_limit) {
      coords.resize(g.numel());
      for (std::size_t i = 0; i < g.numel(); ++i) coords[i] = i;
    } else {
      coords.resize(std::min<std::size_t>(subsample, g.numel()));
      for (std::size_t& c : coords) c = rng.uniform_int(g.numel());
    }
    GradReport::Entry entry;
    entry.name = name;
    for (std::size_t c : coords) {
      double orig = p.data[c];
      p.data[c] = orig + eps;
      double fp = loss(work);
      p.data[c] = orig - eps;
      double fm = loss(work);
      p.data[c] = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NumericError("finite_difference_check: non-finite loss at " + name);
      }
      double numeric = (fp - fm) / (2.0 * eps);
      double a = g.data[c];
      double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      if (rel > entry.max_rel_error) {
        entry.max_rel_error = rel;
        entry.worst_index = c;
      }
    }
    if (entry.max_rel_error > report.max_rel_error) {
      report.max_rel_error = entry.max_rel_error;
      report.worst_param = name;
      report.worst_index = entry.worst_index;
    }
    report.per_param.push_back(std::move(entry));
  }
  return report;
}

}  // namespace ibx

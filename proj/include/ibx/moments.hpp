#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "ibx/error.hpp"

namespace ibx {

// Welford streaming mean/variance. Variance is the population variance m2/n.
struct RunningMoments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void update(double x) {
    if (!std::isfinite(x)) throw NumericError("running moments: non-finite value");
    count += 1.0;
    double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  void update(std::span<const double> values) {
    for (double v : values) update(v);
  }

  double variance() const { return count > 0.0 ? (m2 > 0.0 ? m2 / count : 0.0) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
};

}  // namespace ibx

#pragma once

#include <vector>

#include "ibx/db_model.hpp"
#include "ibx/moments.hpp"

namespace ibx {

// sqrt KL of the representation posterior to the standard normal
double db_bonus(const Tensor& obs, int action, const ParamSet& ps, const DBConfig& cfg);
std::vector<double> db_bonus_batch(const Tensor& obs, const std::vector<int>& actions,
                                   const ParamSet& ps, const DBConfig& cfg);

// Streaming-std normalizer. The first `warmup` samples pass through unscaled
// (they still update the statistics); afterwards values are divided by
// max(running std, 1e-8).
class BonusNormalizer {
 public:
  explicit BonusNormalizer(bool enabled = true, std::size_t warmup = 100)
      : enabled_(enabled), warmup_(warmup) {}

  std::vector<double> normalize(const std::vector<double>& raw);

  bool enabled() const { return enabled_; }
  const RunningMoments& moments() const { return moments_; }

 private:
  RunningMoments moments_;
  bool enabled_;
  std::size_t warmup_;
};

}  // namespace ibx

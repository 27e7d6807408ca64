#include "ibx/bonus.hpp"

#include <cmath>

#include "ibx/gaussian.hpp"

namespace ibx {

double db_bonus(const Tensor& obs, int action, const ParamSet& ps, const DBConfig& cfg) {
  GaussianDiag post = posterior(encode(obs, Branch::online, ps, cfg), action, ps, cfg);
  return std::sqrt(kl_to_standard_normal(post));
}

std::vector<double> db_bonus_batch(const Tensor& obs, const std::vector<int>& actions,
                                   const ParamSet& ps, const DBConfig& cfg) {
  Tensor mean, std;
  posterior_batch(obs, actions, ps, cfg, mean, std);
  std::size_t b = obs.rows(), n = cfg.latent_dim;
  std::vector<double> out(b, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    double kl = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double m = mean.data[i * n + j];
      double s = std.data[i * n + j];
      kl += 0.5 * (m * m + s * s - 1.0) - std::log(s);
    }
    out[i] = std::sqrt(std::max(kl, 0.0));
  }
  return out;
}

std::vector<double> BonusNormalizer::normalize(const std::vector<double>& raw) {
  if (!enabled_) return raw;
  std::vector<double> out;
  out.reserve(raw.size());
  for (double v : raw) {
    moments_.update(v);
    if (moments_.count <= static_cast<double>(warmup_)) {
      out.push_back(v);
    } else {
      out.push_back(v / std::max(moments_.stddev(), 1e-8));
    }
  }
  return out;
}

}  // namespace ibx

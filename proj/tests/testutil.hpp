#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "ibx/gaussian.hpp"
#include "ibx/grid.hpp"
#include "ibx/objectives.hpp"
#include "ibx/rng.hpp"

namespace testutil {

// Monte-Carlo KL(g || N(0,I)) by sampling from g and averaging the
// log-density ratio; independent route against the closed form.
inline double mc_kl_to_standard_normal(const ibx::GaussianDiag& g, std::size_t samples,
                                       ibx::RngStream& rng) {
  double acc = 0.0;
  ibx::GaussianDiag ref(ibx::Tensor(g.mean.shape), ibx::Tensor::full(g.std.shape, 1.0));
  for (std::size_t i = 0; i < samples; ++i) {
    ibx::Tensor z = ibx::sample(g, rng);
    acc += ibx::gaussian_log_density(z, g) - ibx::gaussian_log_density(z, ref);
  }
  return acc / static_cast<double>(samples);
}

// density at a point estimated by the fraction of samples in a small window
inline double mc_density_at(double x, double mean, double std, double half_width,
                            std::size_t samples, ibx::RngStream& rng) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    double z = mean + std * rng.normal();
    if (z >= x - half_width && z <= x + half_width) ++hits;
  }
  return static_cast<double>(hits) / (static_cast<double>(samples) * 2.0 * half_width);
}

struct TwoPassMoments {
  double mean = 0.0;
  double variance = 0.0;  // population
};

inline TwoPassMoments two_pass_moments(const std::vector<double>& xs) {
  TwoPassMoments out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  for (double x : xs) out.variance += (x - out.mean) * (x - out.mean);
  out.variance /= static_cast<double>(xs.size());
  return out;
}

// uniform-random grid transitions for frozen-batch tests
inline ibx::DBBatch collect_grid_batch(const ibx::NoisyGridConfig& cfg, std::size_t count,
                                       std::uint64_t seed) {
  ibx::NoisyGrid env(cfg, seed);
  ibx::RngStream rng(ibx::derive_seed(seed, 17));
  std::size_t d = static_cast<std::size_t>(cfg.obs_dim());
  ibx::DBBatch batch;
  batch.obs = ibx::Tensor({count, d});
  batch.next_obs = ibx::Tensor({count, d});
  batch.actions.resize(count);
  env.reset();
  for (std::size_t i = 0; i < count; ++i) {
    int a = static_cast<int>(rng.uniform_int(4));
    ibx::Transition tr = env.step(a);
    for (std::size_t k = 0; k < d; ++k) {
      batch.obs.at(i, k) = tr.obs.data[k];
      batch.next_obs.at(i, k) = tr.next_obs.data[k];
    }
    batch.actions[i] = a;
    if (tr.done) env.reset();
  }
  return batch;
}

}  // namespace testutil

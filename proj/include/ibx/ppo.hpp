#pragma once

#include <cstdint>
#include <vector>

#include "ibx/policy.hpp"

namespace ibx {

struct PPOConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double entropy_coef = 1e-3;
  double value_coef = 0.5;
  double learning_rate = 1e-4;
  std::size_t epochs = 3;
  std::size_t minibatch_size = 32;
  std::size_t actors = 8;

  void validate() const;
};

// Fixed-horizon on-policy storage, laid out time-major: slot t*actors + a.
// Rewards here are intrinsic only.
struct RolloutBuffer {
  std::size_t actors = 0;
  std::size_t horizon = 0;
  std::size_t obs_dim = 0;
  Tensor obs;  // [actors*horizon, obs_dim]
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;

  RolloutBuffer() = default;
  RolloutBuffer(std::size_t n_actors, std::size_t t, std::size_t d);
  std::size_t slot(std::size_t t, std::size_t actor) const { return t * actors + actor; }
  std::size_t size() const { return actors * horizon; }
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

// delta_t = r_t + gamma*V(s_{t+1})*(1-done_t) - V(s_t)
// A_t     = delta_t + gamma*lambda*(1-done_t)*A_{t+1}
// bootstrap_values supplies V(s_T) per actor
GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda,
                      const std::vector<double>& bootstrap_values);

struct PPOStats {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double loss = 0.0;
  std::size_t minibatches = 0;
};

// clipped-surrogate update with batch-normalized advantages; epochs sample
// minibatches without replacement
PPOStats ppo_update(const RolloutBuffer& buffer, const std::vector<double>& bootstrap_values,
                    ParamSet& ps, const PolicyConfig& pcfg, const PPOConfig& cfg,
                    AdamOptimizer& opt, RngStream& rng);

// exposed for tests: mean 0 / std 1 unless the batch is degenerate, which
// yields zeros
std::vector<double> normalize_advantages(const std::vector<double>& adv);

}  // namespace ibx

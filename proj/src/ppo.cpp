#include "ibx/ppo.hpp"

#include <algorithm>
#include <cmath>

#include "ibx/error.hpp"

namespace ibx {

void PPOConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo: gamma must lie in (0,1]");
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) {
    throw ConfigError("ppo: gae_lambda must lie in (0,1]");
  }
  if (clip_eps <= 0.0) throw ConfigError("ppo: clip_eps must be > 0");
  if (entropy_coef < 0.0 || value_coef < 0.0) throw ConfigError("ppo: negative loss weight");
  if (learning_rate <= 0.0) throw ConfigError("ppo: learning_rate must be > 0");
  if (epochs == 0 || minibatch_size == 0 || actors == 0) {
    throw ConfigError("ppo: epochs, minibatch_size and actors must be positive");
  }
}

RolloutBuffer::RolloutBuffer(std::size_t n_actors, std::size_t t, std::size_t d)
    : actors(n_actors), horizon(t), obs_dim(d), obs({n_actors * t, d}) {
  actions.assign(size(), 0);
  log_probs.assign(size(), 0.0);
  values.assign(size(), 0.0);
  rewards.assign(size(), 0.0);
  dones.assign(size(), 0);
}

GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda,
                      const std::vector<double>& bootstrap_values) {
  if (bootstrap_values.size() != buffer.actors) {
    throw ConfigError("compute_gae: one bootstrap value per actor required");
  }
  GaeResult out;
  out.advantages.assign(buffer.size(), 0.0);
  out.returns.assign(buffer.size(), 0.0);
  for (std::size_t a = 0; a < buffer.actors; ++a) {
    double next_adv = 0.0;
    double next_value = bootstrap_values[a];
    for (std::size_t ti = buffer.horizon; ti > 0; --ti) {
      std::size_t t = ti - 1;
      std::size_t i = buffer.slot(t, a);
      double not_done = buffer.dones[i] ? 0.0 : 1.0;
      double delta = buffer.rewards[i] + gamma * next_value * not_done - buffer.values[i];
      next_adv = delta + gamma * lambda * not_done * next_adv;
      out.advantages[i] = next_adv;
      out.returns[i] = next_adv + buffer.values[i];
      next_value = buffer.values[i];
    }
  }
  return out;
}

std::vector<double> normalize_advantages(const std::vector<double>& adv) {
  std::size_t n = adv.size();
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  std::vector<double> out(n, 0.0);
  if (var < 1e-24) return out;  // degenerate batch: all-equal advantages
  double inv = 1.0 / std::sqrt(var);
  for (std::size_t i = 0; i < n; ++i) out[i] = (adv[i] - mean) * inv;
  return out;
}

PPOStats ppo_update(const RolloutBuffer& buffer, const std::vector<double>& bootstrap_values,
                    ParamSet& ps, const PolicyConfig& pcfg, const PPOConfig& cfg,
                    AdamOptimizer& opt, RngStream& rng) {
  cfg.validate();
  GaeResult gae = compute_gae(buffer, cfg.gamma, cfg.gae_lambda, bootstrap_values);
  std::vector<double> adv = normalize_advantages(gae.advantages);

  std::size_t n = buffer.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  PPOStats stats;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = rng.uniform_int(i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < n; start += cfg.minibatch_size) {
      std::size_t end = std::min(start + cfg.minibatch_size, n);
      std::size_t m = end - start;
      Tensor mb_obs({m, buffer.obs_dim});
      std::vector<int> mb_actions(m);
      Tensor mb_adv({m, 1});
      Tensor mb_ret({m, 1});
      Tensor mb_logp_old({m, 1});
      for (std::size_t k = 0; k < m; ++k) {
        std::size_t src = order[start + k];
        for (std::size_t d = 0; d < buffer.obs_dim; ++d) {
          mb_obs.at(k, d) = buffer.obs.at(src, d);
        }
        mb_actions[k] = buffer.actions[src];
        mb_adv.data[k] = adv[src];
        mb_ret.data[k] = gae.returns[src];
        mb_logp_old.data[k] = buffer.log_probs[src];
      }

      Graph g;
      PolicyVars pv = policy_forward_g(g, g.constant(mb_obs), ps, pcfg, true);
      Graph::Var logp = g.logprob_rows(pv.logits, mb_actions);
      Graph::Var ratio = g.exp(g.sub(logp, g.constant(mb_logp_old)));
      Graph::Var adv_c = g.constant(mb_adv);
      Graph::Var surr = g.mean_all(g.minimum(
          g.mul(ratio, adv_c),
          g.mul(g.clip(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps), adv_c)));
      Graph::Var vloss = g.mean_all(g.square(g.sub(pv.value, g.constant(mb_ret))));
      Graph::Var ent = g.entropy_mean(pv.logits);
      Graph::Var loss = g.add(g.add(g.neg(surr), g.scale(vloss, cfg.value_coef)),
                              g.scale(ent, -cfg.entropy_coef));

      double loss_val = g.value(loss).data[0];
      if (!std::isfinite(loss_val)) {
        throw NumericError("ppo_update: non-finite loss, update aborted");
      }
      g.backward(loss);
      ParamSet grads;
      for (const std::string& name : ps.names()) {
        if (g.has_param(name)) grads.add(name, g.param_grad(name));
      }
      opt.step(ps, grads);

      stats.surrogate += g.value(surr).data[0];
      stats.value_loss += g.value(vloss).data[0];
      stats.entropy += g.value(ent).data[0];
      stats.loss += loss_val;
      ++stats.minibatches;
    }
  }
  if (stats.minibatches > 0) {
    double inv = 1.0 / static_cast<double>(stats.minibatches);
    stats.surrogate *= inv;
    stats.value_loss *= inv;
    stats.entropy *= inv;
    stats.loss *= inv;
  }
  return stats;
}

}  // namespace ibx

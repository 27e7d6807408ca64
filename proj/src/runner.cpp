#include "ibx/runner.hpp"

#include <chrono>
#include <cmath>

#include "ibx/error.hpp"

namespace ibx {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  auto dt = std::chrono::steady_clock::now() - t0;
  return std::chrono::duration<double, std::milli>(dt).count();
}

}  // namespace

ParamSet merged_params(const ParamSet& db, const ParamSet& policy) {
  ParamSet all;
  for (const std::string& n : db.names()) all.add(n, db.at(n));
  for (const std::string& n : policy.names()) all.add(n, policy.at(n));
  return all;
}

double encoder_probe_std(const Tensor& probe_obs, const ParamSet& db, const DBConfig& cfg) {
  Tensor enc = encode_batch(probe_obs, Branch::online, db, cfg);
  std::size_t rows = enc.rows(), dims = enc.cols();
  if (rows < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < dims; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < rows; ++i) mean += enc.at(i, j);
    mean /= static_cast<double>(rows);
    double var = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      double d = enc.at(i, j) - mean;
      var += d * d;
    }
    acc += std::sqrt(var / static_cast<double>(rows));
  }
  return acc / static_cast<double>(dims);
}

RunResult sse_db_run(const DBConfig& db_cfg, const PolicyConfig& policy_cfg,
                     const PPOConfig& ppo_cfg, const RunConfig& run_cfg,
                     const RunOptions& options) {
  db_cfg.validate();
  ppo_cfg.validate();
  if (!options.env_factory) throw ConfigError("run: env_factory is required");

  std::size_t n_actors = ppo_cfg.actors;
  std::vector<std::unique_ptr<Env>> envs;
  envs.reserve(n_actors);
  for (std::size_t i = 0; i < n_actors; ++i) {
    envs.push_back(options.env_factory(i, derive_seed(run_cfg.seed, 100 + i)));
  }
  std::size_t obs_dim = static_cast<std::size_t>(envs[0]->obs_dim());
  std::size_t n_actions = static_cast<std::size_t>(envs[0]->action_count());
  std::size_t t_len = static_cast<std::size_t>(envs[0]->horizon());
  if (policy_cfg.obs_dim != obs_dim || policy_cfg.action_count != n_actions ||
      db_cfg.obs_dim != obs_dim || db_cfg.action_count != n_actions) {
    throw ConfigError("run: env dimensions disagree with model configs");
  }

  RngStream rng_db_init(derive_seed(run_cfg.seed, 1));
  RngStream rng_policy_init(derive_seed(run_cfg.seed, 2));
  RngStream rng_action(derive_seed(run_cfg.seed, 3));
  RngStream rng_shuffle(derive_seed(run_cfg.seed, 4));
  RngStream rng_eps(derive_seed(run_cfg.seed, 5));

  RunResult result;
  result.db_params = init_db_params(db_cfg, rng_db_init);
  result.policy_params = init_policy_params(policy_cfg, rng_policy_init);
  AdamOptimizer db_opt(db_cfg.learning_rate);
  AdamOptimizer ppo_opt(ppo_cfg.learning_rate);
  BonusNormalizer normalizer;

  int probe_state_count = envs[0]->state_count();
  std::vector<bool> seen;
  if (probe_state_count > 0) {
    result.probe_states = static_cast<std::size_t>(probe_state_count);
    result.probe_actions = n_actions;
    result.visit_counts.assign(result.probe_states * n_actions, 0);
    result.bonus_sums.assign(result.probe_states * n_actions, 0.0);
    seen.assign(result.probe_states, false);
  }
  std::size_t coverage = 0;
  auto mark_seen = [&](int s) {
    if (s >= 0 && !seen.empty() && !seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = true;
      ++coverage;
    }
  };

  for (std::size_t episode = 0; episode < run_cfg.episodes; ++episode) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      RolloutBuffer buf(n_actors, t_len, obs_dim);
      Tensor next_obs_all({n_actors * t_len, obs_dim});
      Tensor obs_cur({n_actors, obs_dim});
      std::vector<double> extrinsic_sum(n_actors, 0.0);
      std::vector<bool> goal_hit(n_actors, false);
      std::vector<int> state_before(n_actors * t_len, -1);

      for (std::size_t i = 0; i < n_actors; ++i) {
        Tensor o = envs[i]->reset();
        for (std::size_t d = 0; d < obs_dim; ++d) obs_cur.at(i, d) = o.data[d];
        mark_seen(envs[i]->state_index());
      }

      for (std::size_t t = 0; t < t_len; ++t) {
        PolicyEval pe;
        if (!options.uniform_random_policy) {
          pe = policy_forward(obs_cur, result.policy_params, policy_cfg);
        }
        for (std::size_t i = 0; i < n_actors; ++i) {
          int action;
          double logp = 0.0, value = 0.0;
          if (options.uniform_random_policy) {
            action = static_cast<int>(rng_action.uniform_int(n_actions));
          } else {
            action = sample_action(pe.probs, i, rng_action);
            logp = std::log(pe.probs.at(i, static_cast<std::size_t>(action)));
            value = pe.value.data[i];
          }
          int s_before = envs[i]->state_index();
          Transition tr = envs[i]->step(action);
          if (!result.visit_counts.empty() && s_before >= 0) {
            result.visit_counts[static_cast<std::size_t>(s_before) * n_actions +
                                static_cast<std::size_t>(action)] += 1;
          }
          mark_seen(envs[i]->state_index());
          std::size_t slot = buf.slot(t, i);
          state_before[slot] = s_before;
          for (std::size_t d = 0; d < obs_dim; ++d) {
            buf.obs.at(slot, d) = obs_cur.at(i, d);
            next_obs_all.at(slot, d) = tr.next_obs.data[d];
          }
          buf.actions[slot] = action;
          buf.log_probs[slot] = logp;
          buf.values[slot] = value;
          buf.dones[slot] = tr.done ? 1 : 0;
          extrinsic_sum[i] += tr.extrinsic_reward;
          if (tr.extrinsic_reward > 0.0) goal_hit[i] = true;
          for (std::size_t d = 0; d < obs_dim; ++d) obs_cur.at(i, d) = tr.next_obs.data[d];
        }
      }
      result.total_env_steps += n_actors * t_len;

      MetricsRecord rec;
      rec.episode = episode;
      rec.env_steps = result.total_env_steps;

      if (!options.uniform_random_policy) {
        // bonuses from the pre-update snapshot of the model
        std::vector<double> raw =
            db_bonus_batch(buf.obs, buf.actions, result.db_params, db_cfg);
        for (std::size_t k = 0; k < raw.size(); ++k) {
          rec.intrinsic_mean += raw[k];
          rec.intrinsic_max = std::max(rec.intrinsic_max, raw[k]);
          if (!result.bonus_sums.empty() && state_before[k] >= 0) {
            result.bonus_sums[static_cast<std::size_t>(state_before[k]) * n_actions +
                              static_cast<std::size_t>(buf.actions[k])] += raw[k];
          }
        }
        rec.intrinsic_mean /= static_cast<double>(raw.size());
        buf.rewards = normalizer.normalize(raw);

        std::vector<double> bootstrap(n_actors, 0.0);
        PolicyEval pe = policy_forward(obs_cur, result.policy_params, policy_cfg);
        for (std::size_t i = 0; i < n_actors; ++i) bootstrap[i] = pe.value.data[i];

        ppo_update(buf, bootstrap, result.policy_params, policy_cfg, ppo_cfg, ppo_opt,
                   rng_shuffle);

        DBBatch batch{buf.obs, buf.actions, next_obs_all};
        LossBreakdown bd;
        for (std::size_t pass = 0; pass < db_cfg.updates_per_episode; ++pass) {
          bd = db_train_step(batch, result.db_params, db_cfg, db_opt, rng_eps);
        }
        rec.i_pred = bd.i_pred;
        rec.i_nce = bd.i_nce;
        rec.i_upper = bd.i_upper;
        rec.total_loss = bd.total;
      }

      double ext = 0.0, goals = 0.0;
      for (std::size_t i = 0; i < n_actors; ++i) {
        ext += extrinsic_sum[i];
        goals += goal_hit[i] ? 1.0 : 0.0;
      }
      rec.extrinsic_eval = ext / static_cast<double>(n_actors);
      rec.goal_rate = goals / static_cast<double>(n_actors);
      rec.coverage = coverage;
      if (options.probe_observations.numel() > 0) {
        rec.encoder_std =
            encoder_probe_std(options.probe_observations, result.db_params, db_cfg);
      } else {
        rec.encoder_std = encoder_probe_std(buf.obs, result.db_params, db_cfg);
      }
      rec.wall_clock_ms = elapsed_ms(t0);

      result.metrics.push_back(rec);
      if (options.on_episode) options.on_episode(rec);
      if (options.on_checkpoint && options.checkpoint_interval > 0 &&
          (episode + 1) % options.checkpoint_interval == 0) {
        options.on_checkpoint(merged_params(result.db_params, result.policy_params), episode);
      }
    } catch (const std::exception& e) {
      throw RunError(episode, e.what());
    }
  }
  return result;
}

}  // namespace ibx

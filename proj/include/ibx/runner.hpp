#pragma once

#include <functional>
#include <memory>

#include "ibx/bonus.hpp"
#include "ibx/grid.hpp"
#include "ibx/metrics.hpp"
#include "ibx/objectives.hpp"
#include "ibx/ppo.hpp"

namespace ibx {

struct RunConfig {
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
};

struct RunOptions {
  // required: per-actor environment instances
  std::function<std::unique_ptr<Env>(std::size_t actor, std::uint64_t seed)> env_factory;
  // fixed probe observations [P, obs_dim] for the collapse diagnostic; when
  // absent the episode batch itself is probed
  Tensor probe_observations;
  // baseline mode: uniform random actions, no model or policy updates
  bool uniform_random_policy = false;
  std::function<void(const MetricsRecord&)> on_episode;
  std::function<void(const ParamSet& all_params, std::size_t episode)> on_checkpoint;
  std::size_t checkpoint_interval = 0;  // 0: final only
};

struct RunResult {
  std::vector<MetricsRecord> metrics;
  ParamSet db_params;
  ParamSet policy_params;
  std::size_t total_env_steps = 0;
  // per-(state, action) probes, valid when the env exposes a state index
  std::size_t probe_states = 0;
  std::size_t probe_actions = 0;
  std::vector<std::uint64_t> visit_counts;  // [state*actions + a]
  std::vector<double> bonus_sums;           // raw bonus emitted per (state, action)
};

// carries the failing episode index when a sub-operation aborts the run
struct RunError : std::runtime_error {
  std::size_t episode;
  RunError(std::size_t ep, const std::string& msg) : std::runtime_error(msg), episode(ep) {}
};

// The episode loop: roll T steps per actor, compute bonuses with the
// pre-update model snapshot, normalize them, update the policy, update the
// model, blend the momentum networks, emit one metrics record.
RunResult sse_db_run(const DBConfig& db_cfg, const PolicyConfig& policy_cfg,
                     const PPOConfig& ppo_cfg, const RunConfig& run_cfg,
                     const RunOptions& options);

// merged view of model + policy parameters, as checkpointed
ParamSet merged_params(const ParamSet& db, const ParamSet& policy);

// mean over encoding dimensions of the per-dimension std across probe rows
double encoder_probe_std(const Tensor& probe_obs, const ParamSet& db, const DBConfig& cfg);

}  // namespace ibx

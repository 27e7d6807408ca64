#pragma once

#include <string>

#include "ibx/db_model.hpp"
#include "ibx/grid.hpp"
#include "ibx/policy.hpp"
#include "ibx/ppo.hpp"
#include "json.hpp"

namespace ibx {

struct RunSection {
  std::size_t episodes = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t metrics_flush_interval = 1;
  std::size_t checkpoint_interval = 0;
};

struct ExperimentConfig {
  NoisyGridConfig env;
  DBConfig db;
  PolicyConfig policy;  // obs_dim/action_count derived from env
  PPOConfig ppo;
  RunSection run;
};

// Strict schema: unknown keys are rejected with their field path, missing
// required fields are named. IB_EXPLORE_SEED in the environment supersedes
// run.seed.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

}  // namespace ibx

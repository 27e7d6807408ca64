#include "ibx/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "ibx/error.hpp"

namespace ibx {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(path + "." + it.key() + ": unknown key");
    }
  }
}

const json& section(const json& j, const std::string& name) {
  if (!j.contains(name)) throw ConfigError(name + ": missing required section");
  if (!j.at(name).is_object()) throw ConfigError(name + ": must be an object");
  return j.at(name);
}

template <typename T>
T field(const json& obj, const std::string& path, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

NoiseMode parse_noise_mode(const std::string& s, const std::string& path) {
  if (s == "none") return NoiseMode::none;
  if (s == "pixel") return NoiseMode::pixel;
  if (s == "box") return NoiseMode::box;
  throw ConfigError(path + ".noise_mode: expected none|pixel|box, got \"" + s + "\"");
}

std::string noise_mode_name(NoiseMode m) {
  switch (m) {
    case NoiseMode::none: return "none";
    case NoiseMode::pixel: return "pixel";
    case NoiseMode::box: return "box";
  }
  return "none";
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(j, "config", {"env", "db", "ppo", "run"});

  ExperimentConfig cfg;

  const json& env = section(j, "env");
  reject_unknown(env, "env",
                 {"type", "grid_side", "noise_dims", "noise_mode", "box_width", "sticky_prob",
                  "goal_cell", "episode_len"});
  std::string env_type = field<std::string>(env, "env", "type", "noisy_grid");
  if (env_type != "noisy_grid") {
    throw ConfigError("env.type: unsupported environment \"" + env_type + "\"");
  }
  cfg.env.grid_side = field<int>(env, "env", "grid_side", cfg.env.grid_side);
  cfg.env.noise_dims = field<int>(env, "env", "noise_dims", cfg.env.noise_dims);
  cfg.env.noise_mode =
      parse_noise_mode(field<std::string>(env, "env", "noise_mode", "none"), "env");
  cfg.env.box_width = field<int>(env, "env", "box_width", cfg.env.box_width);
  cfg.env.sticky_prob = field<double>(env, "env", "sticky_prob", cfg.env.sticky_prob);
  cfg.env.goal_cell = field<int>(env, "env", "goal_cell", cfg.env.goal_cell);
  cfg.env.episode_len = field<int>(env, "env", "episode_len", cfg.env.episode_len);
  try {
    cfg.env.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }

  const json& db = section(j, "db");
  reject_unknown(db, "db",
                 {"enc_hidden", "encoding_dim", "post_hidden", "latent_dim", "pred_hidden",
                  "proj_hidden", "projection_dim", "tau", "alpha1", "alpha2", "alpha3",
                  "learning_rate", "post_init_gain", "updates_per_episode", "shared_encoder"});
  cfg.db.enc_hidden = field<std::size_t>(db, "db", "enc_hidden", cfg.db.enc_hidden);
  cfg.db.encoding_dim = field<std::size_t>(db, "db", "encoding_dim", cfg.db.encoding_dim);
  cfg.db.post_hidden = field<std::size_t>(db, "db", "post_hidden", cfg.db.post_hidden);
  cfg.db.latent_dim = field<std::size_t>(db, "db", "latent_dim", cfg.db.latent_dim);
  cfg.db.pred_hidden = field<std::size_t>(db, "db", "pred_hidden", cfg.db.pred_hidden);
  cfg.db.proj_hidden = field<std::size_t>(db, "db", "proj_hidden", cfg.db.proj_hidden);
  cfg.db.projection_dim = field<std::size_t>(db, "db", "projection_dim", cfg.db.projection_dim);
  cfg.db.tau = field<double>(db, "db", "tau", cfg.db.tau);
  cfg.db.alpha1 = field<double>(db, "db", "alpha1", cfg.db.alpha1);
  cfg.db.alpha2 = field<double>(db, "db", "alpha2", cfg.db.alpha2);
  cfg.db.alpha3 = field<double>(db, "db", "alpha3", cfg.db.alpha3);
  cfg.db.learning_rate = field<double>(db, "db", "learning_rate", cfg.db.learning_rate);
  cfg.db.post_init_gain = field<double>(db, "db", "post_init_gain", cfg.db.post_init_gain);
  cfg.db.updates_per_episode =
      field<std::size_t>(db, "db", "updates_per_episode", cfg.db.updates_per_episode);
  cfg.db.shared_encoder = field<bool>(db, "db", "shared_encoder", cfg.db.shared_encoder);
  cfg.db.obs_dim = static_cast<std::size_t>(cfg.env.obs_dim());
  cfg.db.action_count = 4;
  try {
    cfg.db.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("db: ") + e.what());
  }

  const json& ppo = section(j, "ppo");
  reject_unknown(ppo, "ppo",
                 {"gamma", "gae_lambda", "clip_eps", "entropy_coef", "value_coef",
                  "learning_rate", "epochs", "minibatch_size", "actors", "hidden1", "hidden2"});
  cfg.ppo.gamma = field<double>(ppo, "ppo", "gamma", cfg.ppo.gamma);
  cfg.ppo.gae_lambda = field<double>(ppo, "ppo", "gae_lambda", cfg.ppo.gae_lambda);
  cfg.ppo.clip_eps = field<double>(ppo, "ppo", "clip_eps", cfg.ppo.clip_eps);
  cfg.ppo.entropy_coef = field<double>(ppo, "ppo", "entropy_coef", cfg.ppo.entropy_coef);
  cfg.ppo.value_coef = field<double>(ppo, "ppo", "value_coef", cfg.ppo.value_coef);
  cfg.ppo.learning_rate = field<double>(ppo, "ppo", "learning_rate", cfg.ppo.learning_rate);
  cfg.ppo.epochs = field<std::size_t>(ppo, "ppo", "epochs", cfg.ppo.epochs);
  cfg.ppo.minibatch_size = field<std::size_t>(ppo, "ppo", "minibatch_size", cfg.ppo.minibatch_size);
  cfg.ppo.actors = field<std::size_t>(ppo, "ppo", "actors", cfg.ppo.actors);
  cfg.policy.hidden1 = field<std::size_t>(ppo, "ppo", "hidden1", cfg.policy.hidden1);
  cfg.policy.hidden2 = field<std::size_t>(ppo, "ppo", "hidden2", cfg.policy.hidden2);
  cfg.policy.obs_dim = cfg.db.obs_dim;
  cfg.policy.action_count = 4;
  try {
    cfg.ppo.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("ppo: ") + e.what());
  }

  const json& run = section(j, "run");
  reject_unknown(run, "run",
                 {"episodes", "seed", "out_dir", "metrics_flush_interval",
                  "checkpoint_interval"});
  if (!run.contains("seed")) throw ConfigError("run.seed: missing required field");
  cfg.run.seed = field<std::uint64_t>(run, "run", "seed", 0);
  cfg.run.episodes = field<std::size_t>(run, "run", "episodes", cfg.run.episodes);
  cfg.run.out_dir = field<std::string>(run, "run", "out_dir", cfg.run.out_dir);
  cfg.run.metrics_flush_interval =
      field<std::size_t>(run, "run", "metrics_flush_interval", cfg.run.metrics_flush_interval);
  cfg.run.checkpoint_interval =
      field<std::size_t>(run, "run", "checkpoint_interval", cfg.run.checkpoint_interval);

  if (const char* env_seed = std::getenv("IB_EXPLORE_SEED")) {
    try {
      cfg.run.seed = std::stoull(env_seed);
    } catch (const std::exception&) {
      throw UsageError("IB_EXPLORE_SEED: not a valid unsigned integer");
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: invalid JSON in " + path);
  return parse_experiment_config(j);
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
  return json{
      {"env",
       {{"type", "noisy_grid"},
        {"grid_side", cfg.env.grid_side},
        {"noise_dims", cfg.env.noise_dims},
        {"noise_mode", noise_mode_name(cfg.env.noise_mode)},
        {"box_width", cfg.env.box_width},
        {"sticky_prob", cfg.env.sticky_prob},
        {"goal_cell", cfg.env.goal_cell},
        {"episode_len", cfg.env.episode_len}}},
      {"db",
       {{"enc_hidden", cfg.db.enc_hidden},
        {"encoding_dim", cfg.db.encoding_dim},
        {"post_hidden", cfg.db.post_hidden},
        {"latent_dim", cfg.db.latent_dim},
        {"pred_hidden", cfg.db.pred_hidden},
        {"proj_hidden", cfg.db.proj_hidden},
        {"projection_dim", cfg.db.projection_dim},
        {"tau", cfg.db.tau},
        {"alpha1", cfg.db.alpha1},
        {"alpha2", cfg.db.alpha2},
        {"alpha3", cfg.db.alpha3},
        {"learning_rate", cfg.db.learning_rate},
        {"post_init_gain", cfg.db.post_init_gain},
        {"updates_per_episode", cfg.db.updates_per_episode},
        {"shared_encoder", cfg.db.shared_encoder}}},
      {"ppo",
       {{"gamma", cfg.ppo.gamma},
        {"gae_lambda", cfg.ppo.gae_lambda},
        {"clip_eps", cfg.ppo.clip_eps},
        {"entropy_coef", cfg.ppo.entropy_coef},
        {"value_coef", cfg.ppo.value_coef},
        {"learning_rate", cfg.ppo.learning_rate},
        {"epochs", cfg.ppo.epochs},
        {"minibatch_size", cfg.ppo.minibatch_size},
        {"actors", cfg.ppo.actors},
        {"hidden1", cfg.policy.hidden1},
        {"hidden2", cfg.policy.hidden2}}},
      {"run",
       {{"episodes", cfg.run.episodes},
        {"seed", cfg.run.seed},
        {"out_dir", cfg.run.out_dir},
        {"metrics_flush_interval", cfg.run.metrics_flush_interval},
        {"checkpoint_interval", cfg.run.checkpoint_interval}}}};
}

}  // namespace ibx

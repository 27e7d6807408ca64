#include "ibx/harness.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ibx/checkpoint.hpp"
#include "ibx/error.hpp"
#include "ibx/plot.hpp"

namespace ibx {

namespace {

using nlohmann::json;

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("harness: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

Tensor grid_probe_observations(const NoisyGridConfig& cfg) {
  std::size_t cells = static_cast<std::size_t>(cfg.grid_side * cfg.grid_side);
  Tensor probe({cells, static_cast<std::size_t>(cfg.obs_dim())});
  for (std::size_t i = 0; i < cells; ++i) probe.at(i, i) = 1.0;
  return probe;
}

RunOptions make_grid_run_options(const ExperimentConfig& cfg) {
  RunOptions options;
  NoisyGridConfig env_cfg = cfg.env;
  options.env_factory = [env_cfg](std::size_t, std::uint64_t seed) {
    return std::make_unique<NoisyGrid>(env_cfg, seed);
  };
  options.probe_observations = grid_probe_observations(cfg.env);
  options.checkpoint_interval = cfg.run.checkpoint_interval;
  return options;
}

int run_train_command(const ExperimentConfig& cfg, const std::string& out_dir) {
  std::string dir = out_dir.empty() ? (cfg.run.out_dir.empty() ? "." : cfg.run.out_dir) : out_dir;
  std::filesystem::create_directories(dir);
  MetricsWriter writer(dir + "/metrics.jsonl", cfg.run.metrics_flush_interval);

  RunOptions options = make_grid_run_options(cfg);
  options.on_episode = [&writer](const MetricsRecord& r) { writer.write(r); };
  options.on_checkpoint = [&dir](const ParamSet& params, std::size_t) {
    checkpoint_save(params, dir + "/checkpoint_last.ibx");
  };

  RunConfig run_cfg{cfg.run.episodes, cfg.run.seed};
  auto t0 = std::chrono::steady_clock::now();
  try {
    RunResult result = sse_db_run(cfg.db, cfg.policy, cfg.ppo, run_cfg, options);
    double total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    writer.close();
    checkpoint_save(merged_params(result.db_params, result.policy_params),
                    dir + "/checkpoint_final.ibx");

    json summary;
    summary["config"] = experiment_config_to_json(cfg);
    summary["episodes"] = result.metrics.size();
    summary["env_steps"] = result.total_env_steps;
    summary["wall_clock_ms"] = total_ms;
    if (!result.metrics.empty()) {
      std::size_t q = std::max<std::size_t>(1, result.metrics.size() / 4);
      double goal = 0.0, ext = 0.0;
      for (std::size_t i = result.metrics.size() - q; i < result.metrics.size(); ++i) {
        goal += result.metrics[i].goal_rate;
        ext += result.metrics[i].extrinsic_eval;
      }
      summary["final_quarter_goal_rate"] = goal / static_cast<double>(q);
      summary["final_quarter_extrinsic"] = ext / static_cast<double>(q);
      summary["coverage"] = result.metrics.back().coverage;
      summary["encoder_std"] = result.metrics.back().encoder_std;
    }
    if (!result.visit_counts.empty()) summary["visit_counts"] = result.visit_counts;
    write_json_file(summary, dir + "/summary.json");
    return 0;
  } catch (const RunError& e) {
    writer.write_error(e.what(), e.episode);
    writer.close();
    std::cerr << "error: episode " << e.episode << ": " << e.what() << "\n";
    return 1;
  }
}

int run_eval_command(const std::string& checkpoint_path, const ExperimentConfig& cfg,
                     std::size_t episodes) {
  ParamSet all = checkpoint_load(checkpoint_path);
  ParamSet policy;
  for (const std::string& name : all.names()) {
    if (name.rfind("pol.", 0) == 0) policy.add(name, all.at(name));
  }
  if (policy.size() == 0) {
    throw ConfigError("eval: checkpoint holds no policy parameters");
  }

  NoisyGrid env(cfg.env, derive_seed(cfg.run.seed, 100));
  RngStream rng(derive_seed(cfg.run.seed, 3));
  double total_return = 0.0;
  std::size_t goals = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    Tensor obs = env.reset();
    bool hit = false;
    for (int t = 0; t < cfg.env.episode_len; ++t) {
      PolicyEval pe = policy_forward(obs, policy, cfg.policy);
      int action = sample_action(pe.probs, 0, rng);
      Transition tr = env.step(action);
      total_return += tr.extrinsic_reward;
      if (tr.extrinsic_reward > 0.0) hit = true;
      obs = tr.next_obs;
    }
    if (hit) ++goals;
  }
  json report{{"episodes", episodes},
              {"mean_extrinsic_return", episodes ? total_return / static_cast<double>(episodes) : 0.0},
              {"goal_rate", episodes ? static_cast<double>(goals) / static_cast<double>(episodes) : 0.0}};
  std::cout << report.dump() << "\n";
  return 0;
}

int run_plot_command(const std::string& metrics_path, const std::string& out_dir) {
  std::vector<MetricsRecord> records = read_metrics_file(metrics_path);
  emit_plots(records, out_dir);
  return 0;
}

}  // namespace ibx

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ibx/checkpoint.hpp"
#include "ibx/config.hpp"
#include "ibx/harness.hpp"
#include "ibx/plot.hpp"
#include "ibx/verify.hpp"

using namespace ibx;
namespace fs = std::filesystem;

namespace {

nlohmann::json minimal_config_json() {
  return nlohmann::json{
      {"env",
       {{"grid_side", 3}, {"noise_dims", 2}, {"noise_mode", "pixel"}, {"goal_cell", 8},
        {"episode_len", 12}}},
      {"db",
       {{"enc_hidden", 16}, {"encoding_dim", 8}, {"post_hidden", 8}, {"latent_dim", 4},
        {"pred_hidden", 8}, {"proj_hidden", 6}, {"projection_dim", 4}}},
      {"ppo", {{"actors", 2}, {"minibatch_size", 8}, {"hidden1", 16}, {"hidden2", 8}}},
      {"run", {{"episodes", 2}, {"seed", 11}}}};
}

std::string temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("ibx_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config parsing validates sections, keys and the seed") {
  nlohmann::json j = minimal_config_json();
  ExperimentConfig cfg = parse_experiment_config(j);
  CHECK(cfg.db.obs_dim == 11);
  CHECK(cfg.policy.obs_dim == 11);
  CHECK(cfg.run.seed == 11);

  nlohmann::json missing_seed = minimal_config_json();
  missing_seed["run"].erase("seed");
  try {
    parse_experiment_config(missing_seed);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("run.seed") != std::string::npos);
  }

  nlohmann::json unknown = minimal_config_json();
  unknown["db"]["learning_rtae"] = 1e-4;
  try {
    parse_experiment_config(unknown);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("db.learning_rtae") != std::string::npos);
  }

  nlohmann::json bad_mode = minimal_config_json();
  bad_mode["env"]["noise_mode"] = "boxy";
  CHECK_THROWS_AS(parse_experiment_config(bad_mode), ConfigError);

  nlohmann::json bad_env = minimal_config_json();
  bad_env["env"]["type"] = "atari";
  CHECK_THROWS_AS(parse_experiment_config(bad_env), ConfigError);
}

TEST_CASE("environment variable overrides the config seed") {
  setenv("IB_EXPLORE_SEED", "4242", 1);
  ExperimentConfig cfg = parse_experiment_config(minimal_config_json());
  unsetenv("IB_EXPLORE_SEED");
  CHECK(cfg.run.seed == 4242);

  setenv("IB_EXPLORE_SEED", "not_a_number", 1);
  CHECK_THROWS_AS(parse_experiment_config(minimal_config_json()), UsageError);
  unsetenv("IB_EXPLORE_SEED");
}

TEST_CASE("checkpoint round trip is bit exact") {
  RngStream rng(5);
  ParamSet ps;
  Tensor a({3, 4}), b({7});
  for (double& v : a.data) v = rng.normal();
  for (double& v : b.data) v = rng.normal() * 1e-12;
  ps.add("alpha.w", a);
  ps.add("beta.b", b);

  std::string dir = temp_dir("ckpt");
  std::string path = dir + "/params.ibx";
  checkpoint_save(ps, path);
  ParamSet loaded = checkpoint_load(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.at("alpha.w").shape == a.shape);
  CHECK(loaded.at("alpha.w").data == a.data);
  CHECK(loaded.at("beta.b").data == b.data);
}

TEST_CASE("checkpoint rejects truncation, edits and version skew distinctly") {
  RngStream rng(6);
  ParamSet ps;
  Tensor t({4});
  for (double& v : t.data) v = rng.normal();
  ps.add("only.w", t);
  std::string dir = temp_dir("ckpt_err");
  std::string path = dir + "/params.ibx";
  checkpoint_save(ps, path);
  std::string bytes = slurp(path);

  // truncated payload
  {
    std::ofstream out(dir + "/short.ibx", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 8));
  }
  try {
    checkpoint_load(dir + "/short.ibx");
    FAIL("expected payload error");
  } catch (const CheckpointError& e) {
    CHECK(e.kind == CheckpointError::Kind::payload_length);
  }

  // edited manifest shape, same payload
  {
    std::string edited = bytes;
    std::size_t pos = edited.find("[4]");
    REQUIRE(pos != std::string::npos);
    edited.replace(pos, 3, "[9]");
    // manifest length unchanged: [9] and [4] have equal width
    std::ofstream out(dir + "/shape.ibx", std::ios::binary);
    out.write(edited.data(), static_cast<std::streamsize>(edited.size()));
  }
  try {
    checkpoint_load(dir + "/shape.ibx");
    FAIL("expected shape error");
  } catch (const CheckpointError& e) {
    CHECK(e.kind == CheckpointError::Kind::shape_mismatch);
    CHECK(std::string(e.what()).find("only.w") != std::string::npos);
  }

  // version bump
  {
    std::string edited = bytes;
    std::size_t pos = edited.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    edited.replace(pos, 11, "\"version\":9");
    std::ofstream out(dir + "/ver.ibx", std::ios::binary);
    out.write(edited.data(), static_cast<std::streamsize>(edited.size()));
  }
  try {
    checkpoint_load(dir + "/ver.ibx");
    FAIL("expected version error");
  } catch (const CheckpointError& e) {
    CHECK(e.kind == CheckpointError::Kind::version_mismatch);
  }

  // garbage manifest
  {
    std::ofstream out(dir + "/junk.ibx", std::ios::binary);
    std::string junk = "\x08\x00\x00\x00\x00\x00\x00\x00garbage!";
    out.write(junk.data(), static_cast<std::streamsize>(junk.size()));
  }
  try {
    checkpoint_load(dir + "/junk.ibx");
    FAIL("expected manifest error");
  } catch (const CheckpointError& e) {
    CHECK(e.kind == CheckpointError::Kind::corrupt_manifest);
  }
}

TEST_CASE("metrics jsonl round trip and malformed line reporting") {
  std::string dir = temp_dir("metrics");
  std::string path = dir + "/metrics.jsonl";
  {
    MetricsWriter writer(path);
    for (std::size_t i = 0; i < 3; ++i) {
      MetricsRecord r;
      r.episode = i;
      r.env_steps = (i + 1) * 10;
      r.intrinsic_mean = 0.5 * static_cast<double>(i);
      r.coverage = i;
      writer.write(r);
    }
  }
  std::vector<MetricsRecord> back = read_metrics_file(path);
  REQUIRE(back.size() == 3);
  CHECK(back[2].env_steps == 30);
  CHECK(back[1].intrinsic_mean == doctest::Approx(0.5));

  {
    std::ofstream out(path, std::ios::app);
    out << "{not json\n";
  }
  try {
    read_metrics_file(path);
    FAIL("expected parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("plot emission writes four svg charts and one matching csv") {
  std::string dir = temp_dir("plots");
  std::vector<MetricsRecord> records;
  for (std::size_t i = 0; i < 10; ++i) {
    MetricsRecord r;
    r.episode = i;
    r.intrinsic_mean = std::sin(static_cast<double>(i));
    r.encoder_std = 0.1;
    records.push_back(r);
  }
  emit_plots(records, dir);
  for (const char* name : {"intrinsic_reward.svg", "extrinsic_eval.svg",
                           "loss_components.svg", "collapse_diagnostic.svg"}) {
    CHECK(fs::exists(fs::path(dir) / name));
  }
  std::string csv = slurp(dir + "/metrics.csv");
  std::size_t rows = 0;
  for (char c : csv) {
    if (c == '\n') ++rows;
  }
  CHECK(rows == records.size() + 1);  // header included

  // idempotent and fine with an empty record set
  emit_plots({}, dir);
  CHECK(fs::exists(fs::path(dir) / "intrinsic_reward.svg"));
  std::string empty_csv = slurp(dir + "/metrics.csv");
  std::size_t empty_rows = 0;
  for (char c : empty_csv) {
    if (c == '\n') ++empty_rows;
  }
  CHECK(empty_rows == 1);
}

TEST_CASE("train command is deterministic file for file") {
  ExperimentConfig cfg = parse_experiment_config(minimal_config_json());
  std::string dir_a = temp_dir("train_a");
  std::string dir_b = temp_dir("train_b");
  CHECK(run_train_command(cfg, dir_a) == 0);
  CHECK(run_train_command(cfg, dir_b) == 0);
  CHECK(slurp(dir_a + "/metrics.jsonl") == slurp(dir_b + "/metrics.jsonl"));
  CHECK(slurp(dir_a + "/checkpoint_final.ibx") == slurp(dir_b + "/checkpoint_final.ibx"));

  // one record per episode
  CHECK(read_metrics_file(dir_a + "/metrics.jsonl").size() == cfg.run.episodes);
  CHECK(fs::exists(dir_a + "/summary.json"));
}

TEST_CASE("single-episode smoke run emits exactly one record") {
  ExperimentConfig cfg = parse_experiment_config(minimal_config_json());
  cfg.run.episodes = 1;
  std::string dir = temp_dir("train_one");
  CHECK(run_train_command(cfg, dir) == 0);
  CHECK(read_metrics_file(dir + "/metrics.jsonl").size() == 1);
}

TEST_CASE("eval command reads back a saved policy") {
  ExperimentConfig cfg = parse_experiment_config(minimal_config_json());
  std::string dir = temp_dir("train_eval");
  REQUIRE(run_train_command(cfg, dir) == 0);
  CHECK(run_eval_command(dir + "/checkpoint_final.ibx", cfg, 2) == 0);
}

TEST_CASE("unknown verify suite raises a usage error") {
  CHECK_THROWS_AS(run_verify_suite("theorem9"), UsageError);
}

TEST_CASE("theorem suites report machine-readable passes") {
  nlohmann::json t2 = run_verify_suite("theorem2");
  CHECK(verify_passed(t2));
  CHECK(t2["rows"].size() >= 4);
  nlohmann::json nce = run_verify_suite("nce-bound");
  CHECK(verify_passed(nce));
  CHECK(nce["violations"].get<int>() == 0);
}

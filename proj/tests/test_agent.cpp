#include <cmath>

#include "doctest.h"
#include "ibx/gradcheck.hpp"
#include "ibx/runner.hpp"
#include "testutil.hpp"

using namespace ibx;

namespace {

PolicyConfig tiny_policy() {
  PolicyConfig cfg;
  cfg.obs_dim = 5;
  cfg.action_count = 4;
  cfg.hidden1 = 8;
  cfg.hidden2 = 6;
  return cfg;
}

}  // namespace

TEST_CASE("zero-weight policy is uniform with zero value") {
  PolicyConfig cfg = tiny_policy();
  RngStream rng(1);
  ParamSet ps = init_policy_params(cfg, rng);
  for (const std::string& name : ps.names()) {
    for (double& v : ps.at(name).data) v = 0.0;
  }
  Tensor obs({cfg.obs_dim});
  obs.data[0] = 1.0;
  PolicyEval pe = policy_forward(obs, ps, cfg);
  for (std::size_t j = 0; j < cfg.action_count; ++j) {
    CHECK(pe.probs.at(0, j) == doctest::Approx(0.25).epsilon(1e-12));
  }
  CHECK(pe.value.data[0] == 0.0);
}

TEST_CASE("policy probabilities sum to one and entropy stays positive") {
  PolicyConfig cfg = tiny_policy();
  RngStream rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    ParamSet ps = init_policy_params(cfg, rng);
    Tensor obs({3, cfg.obs_dim});
    for (double& v : obs.data) v = rng.normal();
    PolicyEval pe = policy_forward(obs, ps, cfg);
    for (std::size_t i = 0; i < 3; ++i) {
      double sum = 0.0, entropy = 0.0;
      for (std::size_t j = 0; j < cfg.action_count; ++j) {
        double p = pe.probs.at(i, j);
        CHECK(p > 0.0);
        sum += p;
        entropy -= p * std::log(p);
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
      CHECK(entropy > 0.0);
    }
  }
}

TEST_CASE("log-prob gradient of the policy passes the fd oracle") {
  PolicyConfig cfg = tiny_policy();
  RngStream rng(3);
  ParamSet ps = init_policy_params(cfg, rng);
  Tensor obs({4, cfg.obs_dim});
  RngStream in(4);
  for (double& v : obs.data) v = in.normal();
  std::vector<int> actions = {0, 3, 1, 2};

  auto build = [&](Graph& g, const ParamSet& p) {
    PolicyVars pv = policy_forward_g(g, g.constant(obs), p, cfg, true);
    return g.mean_all(g.logprob_rows(pv.logits, actions));
  };
  LossFn loss = [&](const ParamSet& p) {
    Graph g;
    return g.value(build(g, p)).data[0];
  };
  GradFn grad = [&](const ParamSet& p) {
    Graph g;
    Graph::Var root = build(g, p);
    g.backward(root);
    ParamSet out;
    for (const std::string& name : p.names()) {
      if (g.has_param(name)) out.add(name, g.param_grad(name));
    }
    return out;
  };
  RngStream fd_rng(5);
  CHECK(finite_difference_check(loss, grad, ps, 1e-6, fd_rng).max_rel_error < 1e-4);
}

TEST_CASE("gae on the single-step undiscounted case") {
  RolloutBuffer buf(1, 1, 2);
  buf.rewards[0] = 1.0;
  GaeResult g = compute_gae(buf, 1.0, 1.0, {0.0});
  CHECK(g.advantages[0] == doctest::Approx(1.0));
  CHECK(g.returns[0] == doctest::Approx(1.0));
}

TEST_CASE("gae matches the discounted-sum recursion by hand") {
  RolloutBuffer buf(1, 2, 2);
  buf.rewards[buf.slot(0, 0)] = 1.0;
  buf.rewards[buf.slot(1, 0)] = 1.0;
  GaeResult g = compute_gae(buf, 0.5, 1.0, {0.0});
  CHECK(g.advantages[buf.slot(0, 0)] == doctest::Approx(1.5));
  CHECK(g.advantages[buf.slot(1, 0)] == doctest::Approx(1.0));
}

TEST_CASE("gae masks the bootstrap at done flags") {
  RolloutBuffer buf(1, 2, 2);
  buf.rewards[buf.slot(0, 0)] = 2.0;
  buf.values[buf.slot(0, 0)] = 0.5;
  buf.dones[buf.slot(0, 0)] = 1;
  buf.rewards[buf.slot(1, 0)] = 100.0;
  buf.values[buf.slot(1, 0)] = 50.0;
  GaeResult g = compute_gae(buf, 0.9, 0.8, {1000.0});
  CHECK(g.advantages[buf.slot(0, 0)] == doctest::Approx(2.0 - 0.5));

  CHECK_THROWS_AS(compute_gae(buf, 0.9, 0.8, {}), ConfigError);
}

TEST_CASE("advantage normalization yields mean zero and unit std") {
  std::vector<double> adv = {1.0, -2.0, 0.5, 3.0, -1.5, 0.25};
  std::vector<double> out = normalize_advantages(adv);
  double mean = 0.0;
  for (double a : out) mean += a;
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (double a : out) var += (a - mean) * (a - mean);
  var /= static_cast<double>(out.size());
  CHECK(std::abs(mean) <= 1e-9);
  CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-6));

  // degenerate batches give zeros
  std::vector<double> flat = {2.0, 2.0, 2.0};
  for (double a : normalize_advantages(flat)) CHECK(a == 0.0);
}

TEST_CASE("clipped surrogate hand values") {
  // ratio 2 built from log-probs, advantage +1 -> min(2, 1.2) = 1.2
  auto objective = [](double ratio, double adv) {
    Graph g;
    Graph::Var logp = g.constant(Tensor({1, 1}, {std::log(ratio * 0.2)}));
    Graph::Var logp_old = g.constant(Tensor({1, 1}, {std::log(0.2)}));
    Graph::Var r = g.exp(g.sub(logp, logp_old));
    Graph::Var a = g.constant(Tensor({1, 1}, {adv}));
    return g.value(g.mean_all(g.minimum(g.mul(r, a), g.mul(g.clip(r, 0.8, 1.2), a)))).data[0];
  };
  CHECK(objective(2.0, 1.0) == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(objective(2.0, -1.0) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("first-pass surrogate is zero after advantage normalization") {
  PolicyConfig cfg = tiny_policy();
  RngStream rng(6);
  ParamSet ps = init_policy_params(cfg, rng);

  std::size_t t_len = 8;
  RolloutBuffer buf(1, t_len, cfg.obs_dim);
  RngStream in(7);
  for (double& v : buf.obs.data) v = in.normal();
  for (std::size_t t = 0; t < t_len; ++t) {
    Tensor row({cfg.obs_dim});
    for (std::size_t k = 0; k < cfg.obs_dim; ++k) row.data[k] = buf.obs.at(t, k);
    PolicyEval pe = policy_forward(row, ps, cfg);
    int a = sample_action(pe.probs, 0, in);
    buf.actions[t] = a;
    buf.log_probs[t] = std::log(pe.probs.at(0, static_cast<std::size_t>(a)));
    buf.values[t] = pe.value.data[0];
    buf.rewards[t] = in.normal();
  }
  PPOConfig pcfg;
  pcfg.actors = 1;
  pcfg.epochs = 1;
  pcfg.minibatch_size = t_len;  // a single minibatch: ratios are exactly 1
  AdamOptimizer opt(1e-4);
  RngStream shuffle(8);
  PPOStats stats = ppo_update(buf, {0.0}, ps, cfg, pcfg, opt, shuffle);
  CHECK(std::abs(stats.surrogate) < 1e-9);
  CHECK(stats.minibatches == 1);
}

namespace {

// passes extrinsic rewards through a distortion; everything else untouched
class PoisonedGrid : public Env {
 public:
  PoisonedGrid(NoisyGridConfig cfg, std::uint64_t seed, double poison)
      : inner_(cfg, seed), poison_(poison) {}
  Tensor reset() override { return inner_.reset(); }
  Transition step(int action) override {
    Transition t = inner_.step(action);
    t.extrinsic_reward = poison_;
    return t;
  }
  int action_count() const override { return inner_.action_count(); }
  int obs_dim() const override { return inner_.obs_dim(); }
  int horizon() const override { return inner_.horizon(); }
  int state_index() const override { return inner_.state_index(); }
  int state_count() const override { return inner_.state_count(); }

 private:
  NoisyGrid inner_;
  double poison_;
};

struct SmallRun {
  DBConfig db;
  PolicyConfig policy;
  PPOConfig ppo;
  NoisyGridConfig env;
};

SmallRun small_run() {
  SmallRun s;
  s.env.grid_side = 3;
  s.env.noise_dims = 2;
  s.env.noise_mode = NoiseMode::pixel;
  s.env.goal_cell = 8;
  s.env.episode_len = 16;
  s.db.obs_dim = static_cast<std::size_t>(s.env.obs_dim());
  s.db.action_count = 4;
  s.db.enc_hidden = 16;
  s.db.encoding_dim = 8;
  s.db.post_hidden = 8;
  s.db.latent_dim = 4;
  s.db.pred_hidden = 8;
  s.db.proj_hidden = 6;
  s.db.projection_dim = 4;
  s.policy.obs_dim = s.db.obs_dim;
  s.policy.action_count = 4;
  s.policy.hidden1 = 16;
  s.policy.hidden2 = 8;
  s.ppo.actors = 2;
  s.ppo.minibatch_size = 8;
  return s;
}

}  // namespace

TEST_CASE("extrinsic rewards never reach any gradient") {
  SmallRun s = small_run();
  RunConfig run{3, 77};

  auto run_with_poison = [&](double poison, bool poisoned) {
    RunOptions options;
    NoisyGridConfig env_cfg = s.env;
    options.env_factory = [env_cfg, poison, poisoned](std::size_t, std::uint64_t seed)
        -> std::unique_ptr<Env> {
      if (poisoned) return std::make_unique<PoisonedGrid>(env_cfg, seed, poison);
      return std::make_unique<NoisyGrid>(env_cfg, seed);
    };
    return sse_db_run(s.db, s.policy, s.ppo, run, options);
  };

  RunResult clean = run_with_poison(0.0, false);
  RunResult poisoned = run_with_poison(1e6, true);
  for (const std::string& name : clean.db_params.names()) {
    CHECK(clean.db_params.at(name).data == poisoned.db_params.at(name).data);
  }
  for (const std::string& name : clean.policy_params.names()) {
    CHECK(clean.policy_params.at(name).data == poisoned.policy_params.at(name).data);
  }
  // the poisoned run logged the poisoned evaluation, proving it was observed
  CHECK(poisoned.metrics[0].extrinsic_eval > 1e5);
}

TEST_CASE("run with zero episodes returns the initial state only") {
  SmallRun s = small_run();
  RunOptions options;
  NoisyGridConfig env_cfg = s.env;
  options.env_factory = [env_cfg](std::size_t, std::uint64_t seed) {
    return std::make_unique<NoisyGrid>(env_cfg, seed);
  };
  RunResult r = sse_db_run(s.db, s.policy, s.ppo, RunConfig{0, 5}, options);
  CHECK(r.metrics.empty());
  CHECK(r.total_env_steps == 0);
  CHECK(r.db_params.size() > 0);
}

TEST_CASE("identical seeds reproduce the metrics stream bit for bit") {
  SmallRun s = small_run();
  RunOptions options;
  NoisyGridConfig env_cfg = s.env;
  options.env_factory = [env_cfg](std::size_t, std::uint64_t seed) {
    return std::make_unique<NoisyGrid>(env_cfg, seed);
  };
  RunResult a = sse_db_run(s.db, s.policy, s.ppo, RunConfig{4, 123}, options);
  RunResult b = sse_db_run(s.db, s.policy, s.ppo, RunConfig{4, 123}, options);
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    CHECK(a.metrics[i].intrinsic_mean == b.metrics[i].intrinsic_mean);
    CHECK(a.metrics[i].total_loss == b.metrics[i].total_loss);
    CHECK(a.metrics[i].encoder_std == b.metrics[i].encoder_std);
    CHECK(a.metrics[i].coverage == b.metrics[i].coverage);
  }
  CHECK(a.visit_counts == b.visit_counts);
}

TEST_CASE("uniform baseline mode skips training but tracks coverage") {
  SmallRun s = small_run();
  RunOptions options;
  NoisyGridConfig env_cfg = s.env;
  options.env_factory = [env_cfg](std::size_t, std::uint64_t seed) {
    return std::make_unique<NoisyGrid>(env_cfg, seed);
  };
  options.uniform_random_policy = true;
  RunResult r = sse_db_run(s.db, s.policy, s.ppo, RunConfig{3, 9}, options);
  CHECK(r.metrics.size() == 3);
  CHECK(r.metrics.back().coverage > 1);
  CHECK(r.metrics.back().total_loss == 0.0);
}

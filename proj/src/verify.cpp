#include "ibx/verify.hpp"

#include <cmath>

#include "ibx/bonus.hpp"
#include "ibx/error.hpp"
#include "ibx/gradcheck.hpp"
#include "ibx/grid.hpp"
#include "ibx/objectives.hpp"
#include "ibx/runner.hpp"
#include "ibx/theory.hpp"

namespace ibx {

namespace {

using nlohmann::json;

json suite_theorem1() {
  json combos = json::array();
  bool pass = true;
  struct Combo {
    std::size_t d;
    double c;
    double ridge;
  };
  const Combo cases[] = {{2, 2.0, 1.0}, {4, 3.0, 1.0}, {6, 8.0, 2.0}, {8, 1.0, 1.5}};
  RngStream rng(20240901);
  for (const Combo& cb : cases) {
    auto reports = verify_theorem1(2500, cb.d, cb.c, cb.ridge, rng);
    std::size_t failures = 0;
    for (const BoundReport& r : reports) {
      if (!r.pass) ++failures;
    }
    pass = pass && failures == 0;
    combos.push_back({{"dim", cb.d},
                      {"c", cb.c},
                      {"ridge", cb.ridge},
                      {"trials", reports.size()},
                      {"failures", failures}});
  }
  return {{"suite", "theorem1"}, {"pass", pass}, {"combos", combos}};
}

json suite_theorem2() {
  auto report = verify_theorem2({10, 50, 99, 100, 500}, 1.0, 64);
  json rows = json::array();
  for (const CountBonusRow& r : report.rows) {
    rows.push_back({{"n", r.n},
                    {"exact", r.exact},
                    {"approx", r.approx},
                    {"rel_error", r.rel_error}});
  }
  bool pass = report.below_half_percent_from_50 && report.monotone_decreasing;
  return {{"suite", "theorem2"},
          {"pass", pass},
          {"below_half_percent_from_50", report.below_half_percent_from_50},
          {"monotone_decreasing", report.monotone_decreasing},
          {"rows", rows}};
}

std::vector<Tensor> nce_test_joints() {
  std::vector<Tensor> joints;
  // independent factorized joint (MI = 0)
  {
    std::vector<double> pz = {0.4, 0.6}, ps = {0.2, 0.3, 0.5};
    Tensor t({2, 3});
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) t.at(i, j) = pz[i] * ps[j];
    joints.push_back(std::move(t));
  }
  // strongly correlated 2x2
  joints.push_back(Tensor({2, 2}, {0.4, 0.1, 0.1, 0.4}));
  // diagonal-heavy 3x3
  {
    Tensor t = Tensor::full({3, 3}, 0.1 / 6.0);
    for (std::size_t i = 0; i < 3; ++i) t.at(i, i) = 0.3;
    joints.push_back(std::move(t));
  }
  // two random joints, exactly renormalized
  RngStream rng(777);
  for (auto [nz, ns] : {std::pair<std::size_t, std::size_t>{4, 2}, {3, 4}}) {
    Tensor t({nz, ns});
    double sum = 0.0;
    for (double& v : t.data) {
      v = rng.uniform() + 0.01;
      sum += v;
    }
    for (double& v : t.data) v /= sum;
    double resid = 1.0;
    for (double v : t.data) resid -= v;
    t.data[0] += resid;
    joints.push_back(std::move(t));
  }
  return joints;
}

json suite_nce_bound() {
  RngStream rng(424242);
  bool pass = true;
  std::size_t checks = 0, violations = 0;
  double worst_margin = 1e300;
  for (const Tensor& joint : nce_test_joints()) {
    for (int table = 0; table < 100; ++table) {
      Tensor h(joint.shape);
      for (double& v : h.data) v = 4.0 * rng.uniform() - 2.0;
      for (int n = 1; n <= 3; ++n) {
        NceBoundReport r = exact_nce_bound_check(joint, h, n);
        ++checks;
        if (!r.holds) ++violations;
        worst_margin = std::min(worst_margin, r.mutual_information - r.bound);
      }
    }
  }
  pass = violations == 0;
  return {{"suite", "nce-bound"},
          {"pass", pass},
          {"checks", checks},
          {"violations", violations},
          {"worst_margin", worst_margin}};
}

// frozen batch of grid transitions collected with uniform random actions
DBBatch collect_batch(const NoisyGridConfig& env_cfg, std::size_t count, std::uint64_t seed) {
  NoisyGrid env(env_cfg, seed);
  RngStream rng(derive_seed(seed, 9));
  std::size_t d = static_cast<std::size_t>(env_cfg.obs_dim());
  DBBatch batch;
  batch.obs = Tensor({count, d});
  batch.next_obs = Tensor({count, d});
  batch.actions.resize(count);
  Tensor obs = env.reset();
  std::size_t filled = 0;
  while (filled < count) {
    int a = static_cast<int>(rng.uniform_int(4));
    Transition tr = env.step(a);
    for (std::size_t k = 0; k < d; ++k) {
      batch.obs.at(filled, k) = tr.obs.data[k];
      batch.next_obs.at(filled, k) = tr.next_obs.data[k];
    }
    batch.actions[filled] = a;
    ++filled;
    obs = tr.next_obs;
    if (tr.done) obs = env.reset();
  }
  return batch;
}

json suite_gradcheck() {
  NoisyGridConfig env_cfg;
  env_cfg.grid_side = 4;
  env_cfg.noise_dims = 0;
  env_cfg.episode_len = 32;

  DBConfig db_cfg;
  db_cfg.obs_dim = static_cast<std::size_t>(env_cfg.obs_dim());
  db_cfg.action_count = 4;

  RngStream init_rng(1234);
  ParamSet db = init_db_params(db_cfg, init_rng);
  DBBatch batch = collect_batch(env_cfg, 8, 99);
  Tensor eps({8, db_cfg.latent_dim});
  RngStream eps_rng(55);
  for (double& e : eps.data) e = eps_rng.normal();

  LossFn db_loss = [&](const ParamSet& p) {
    return db_loss_eval(batch, p, db_cfg, eps).total;
  };
  GradFn db_grad = [&](const ParamSet& p) {
    Graph g;
    Graph::Var total;
    db_loss_build(g, batch, p, db_cfg, eps, total);
    g.backward(total);
    ParamSet grads;
    for (const std::string& name : db_trainable_names(db_cfg)) {
      if (g.has_param(name)) grads.add(name, g.param_grad(name));
    }
    return grads;
  };
  // eps 1e-5: large enough that subtraction noise stays below 1e-4 relative
  // error on the smallest projector gradients, small enough for curvature
  RngStream fd_rng(808);
  GradReport db_report = finite_difference_check(db_loss, db_grad, db, 1e-5, fd_rng);

  // PPO losses on a frozen minibatch; behavior log-probs come from an
  // independently initialized policy so the ratios sit away from 1
  PolicyConfig pcfg;
  pcfg.obs_dim = db_cfg.obs_dim;
  pcfg.action_count = 4;
  RngStream pol_rng(4321), behavior_rng(8765);
  ParamSet pol = init_policy_params(pcfg, pol_rng);
  ParamSet behavior = init_policy_params(pcfg, behavior_rng);

  std::size_t m = 8;
  Tensor mb_obs({m, pcfg.obs_dim});
  std::vector<int> mb_actions(m);
  Tensor mb_adv({m, 1}), mb_ret({m, 1}), mb_logp_old({m, 1});
  DBBatch pool = collect_batch(env_cfg, m, 321);
  RngStream aux_rng(654);
  PolicyEval behavior_eval = policy_forward(pool.obs, behavior, pcfg);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < pcfg.obs_dim; ++k) mb_obs.at(i, k) = pool.obs.at(i, k);
    mb_actions[i] = pool.actions[i];
    mb_adv.data[i] = aux_rng.normal();
    mb_ret.data[i] = aux_rng.normal();
    mb_logp_old.data[i] =
        std::log(behavior_eval.probs.at(i, static_cast<std::size_t>(mb_actions[i])));
  }

  PPOConfig ppo_cfg;
  auto build_ppo = [&](Graph& g, const ParamSet& p) {
    PolicyVars pv = policy_forward_g(g, g.constant(mb_obs), p, pcfg, true);
    Graph::Var logp = g.logprob_rows(pv.logits, mb_actions);
    Graph::Var ratio = g.exp(g.sub(logp, g.constant(mb_logp_old)));
    Graph::Var adv_c = g.constant(mb_adv);
    Graph::Var surr = g.mean_all(g.minimum(
        g.mul(ratio, adv_c),
        g.mul(g.clip(ratio, 1.0 - ppo_cfg.clip_eps, 1.0 + ppo_cfg.clip_eps), adv_c)));
    Graph::Var vloss = g.mean_all(g.square(g.sub(pv.value, g.constant(mb_ret))));
    Graph::Var ent = g.entropy_mean(pv.logits);
    return g.add(g.add(g.neg(surr), g.scale(vloss, ppo_cfg.value_coef)),
                 g.scale(ent, -ppo_cfg.entropy_coef));
  };
  LossFn ppo_loss = [&](const ParamSet& p) {
    Graph g;
    return g.value(build_ppo(g, p)).data[0];
  };
  GradFn ppo_grad = [&](const ParamSet& p) {
    Graph g;
    Graph::Var loss = build_ppo(g, p);
    g.backward(loss);
    ParamSet grads;
    for (const std::string& name : p.names()) {
      if (g.has_param(name)) grads.add(name, g.param_grad(name));
    }
    return grads;
  };
  RngStream fd_rng2(809);
  GradReport ppo_report = finite_difference_check(ppo_loss, ppo_grad, pol, 1e-5, fd_rng2);

  bool pass = db_report.passed(1e-4) && ppo_report.passed(1e-4);
  return {{"suite", "gradcheck"},
          {"pass", pass},
          {"db_loss_max_rel_error", db_report.max_rel_error},
          {"db_loss_worst_param", db_report.worst_param},
          {"ppo_loss_max_rel_error", ppo_report.max_rel_error},
          {"ppo_loss_worst_param", ppo_report.worst_param}};
}

json suite_collapse() {
  CollapseReport r = run_collapse_diagnostic(7);
  bool pass = r.ablated_collapsed && r.default_healthy;
  return {{"suite", "collapse"},
          {"pass", pass},
          {"ablated_std", r.ablated_std},
          {"default_std", r.default_std},
          {"ablated_steps", r.ablated_steps},
          {"default_steps", r.default_steps}};
}

}  // namespace

CollapseReport run_collapse_diagnostic(std::uint64_t seed, std::size_t max_steps) {
  NoisyGridConfig env_cfg;
  env_cfg.grid_side = 4;
  env_cfg.noise_dims = 0;
  env_cfg.episode_len = 64;

  DBConfig base;
  base.obs_dim = static_cast<std::size_t>(env_cfg.obs_dim());
  base.action_count = 4;

  DBBatch pool = collect_batch(env_cfg, 1024, derive_seed(seed, 1));
  std::size_t d = base.obs_dim;
  Tensor probe({static_cast<std::size_t>(env_cfg.grid_side * env_cfg.grid_side), d});
  for (std::size_t i = 0; i < probe.rows(); ++i) probe.at(i, i) = 1.0;

  auto run_arm = [&](bool ablated, double& final_std, std::size_t& steps_used) {
    DBConfig cfg = base;
    if (ablated) {
      cfg.shared_encoder = true;
      cfg.alpha3 = 0.0;
    }
    RngStream init_rng(derive_seed(seed, 2));
    ParamSet ps = init_db_params(cfg, init_rng);
    AdamOptimizer opt(cfg.learning_rate);
    RngStream step_rng(derive_seed(seed, 3));
    std::size_t mb = 256;
    final_std = encoder_probe_std(probe, ps, cfg);
    for (steps_used = 0; steps_used < max_steps; ++steps_used) {
      DBBatch batch;
      batch.obs = Tensor({mb, d});
      batch.next_obs = Tensor({mb, d});
      batch.actions.resize(mb);
      for (std::size_t i = 0; i < mb; ++i) {
        std::size_t src = step_rng.uniform_int(pool.obs.rows());
        for (std::size_t k = 0; k < d; ++k) {
          batch.obs.at(i, k) = pool.obs.at(src, k);
          batch.next_obs.at(i, k) = pool.next_obs.at(src, k);
        }
        batch.actions[i] = pool.actions[src];
      }
      db_train_step(batch, ps, cfg, opt, step_rng);
      if ((steps_used + 1) % 50 == 0) {
        final_std = encoder_probe_std(probe, ps, cfg);
        if (ablated && final_std < 1e-3) {
          ++steps_used;
          return;
        }
      }
    }
    final_std = encoder_probe_std(probe, ps, cfg);
  };

  CollapseReport report;
  run_arm(true, report.ablated_std, report.ablated_steps);
  run_arm(false, report.default_std, report.default_steps);
  report.ablated_collapsed = report.ablated_std < 1e-3;
  report.default_healthy = report.default_std > 1e-2;
  return report;
}

nlohmann::json run_verify_suite(const std::string& name) {
  if (name == "theorem1") return suite_theorem1();
  if (name == "theorem2") return suite_theorem2();
  if (name == "nce-bound") return suite_nce_bound();
  if (name == "gradcheck") return suite_gradcheck();
  if (name == "collapse") return suite_collapse();
  throw UsageError("unknown verify suite \"" + name +
                   "\" (expected theorem1|theorem2|nce-bound|gradcheck|collapse)");
}

bool verify_passed(const nlohmann::json& report) {
  return report.contains("pass") && report["pass"].get<bool>();
}

}  // namespace ibx

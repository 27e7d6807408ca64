#include "ibx/objectives.hpp"

#include <cmath>

#include "ibx/error.hpp"

namespace ibx {

namespace {

Tensor stack_rows(const std::vector<std::pair<Tensor, Tensor>>& pairs, bool first) {
  if (pairs.empty()) throw ConfigError("objectives: empty batch");
  const Tensor& probe = first ? pairs[0].first : pairs[0].second;
  std::size_t n = probe.numel();
  Tensor out({pairs.size(), n});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Tensor& row = first ? pairs[i].first : pairs[i].second;
    if (row.numel() != n) throw DimensionError("objectives: ragged batch");
    for (std::size_t j = 0; j < n; ++j) out.data[i * n + j] = row.data[j];
  }
  return out;
}

// per-row log density of rows of x under N(mean_rows, sigma^2 I) with a
// shared [B,1] sigma: -(n/2)log(2pi) - n*log(sigma) - ||x-mu||^2/(2 sigma^2)
Graph::Var shared_sigma_logdensity_rows(Graph& g, Graph::Var x, Graph::Var mean,
                                        Graph::Var sigma, std::size_t n) {
  Graph::Var d2 = g.row_sum(g.square(g.sub(x, mean)));                // [B,1]
  Graph::Var quad = g.mul(d2, g.recip(g.scale(g.square(sigma), 2.0)));  // [B,1]
  Graph::Var nlog_sig = g.scale(g.log(sigma), static_cast<double>(n));
  Graph::Var t = g.add(quad, nlog_sig);
  return g.add_scalar(g.neg(t), -0.5 * static_cast<double>(n) * kLogTwoPi);
}

// per-row KL(N(mu, diag(std^2)) || N(0,I))
Graph::Var kl_std_normal_rows(Graph& g, Graph::Var mean, Graph::Var std) {
  Graph::Var t = g.add(g.square(mean), g.square(std));
  Graph::Var inner = g.sub(g.add_scalar(t, -1.0), g.scale(g.log(std), 2.0));
  return g.scale(g.row_sum(inner), 0.5);
}

double lse(const std::vector<double>& xs) {
  double mx = xs[0];
  for (double x : xs) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

double loss_i_pred(const std::vector<std::pair<Tensor, Tensor>>& s_next_and_z,
                   const ParamSet& ps, const DBConfig& cfg) {
  if (s_next_and_z.empty()) throw ConfigError("loss_i_pred: empty batch");
  Graph g;
  Graph::Var s_next = g.constant(stack_rows(s_next_and_z, true));
  Graph::Var z = g.constant(stack_rows(s_next_and_z, false));
  GaussVars pred = db_predict_g(g, z, ps, cfg, false);
  Graph::Var rows = shared_sigma_logdensity_rows(g, s_next, pred.mean, pred.std,
                                                 cfg.encoding_dim);
  return g.value(g.mean_all(rows)).data[0];
}

double loss_i_nce(const std::vector<std::pair<Tensor, Tensor>>& z_and_s_next,
                  const ParamSet& ps, const DBConfig& cfg) {
  if (z_and_s_next.size() < 2) {
    throw ConfigError("loss_i_nce: batch of K >= 2 required for negatives");
  }
  Graph g;
  Graph::Var z = g.constant(stack_rows(z_and_s_next, true));
  Graph::Var s_next = g.constant(stack_rows(z_and_s_next, false));
  GaussVars pred = db_predict_g(g, z, ps, cfg, false);
  Graph::Var u_pred = db_project_g(g, pred.mean, ps, cfg, Branch::online, false);
  Graph::Var u_next = db_project_g(g, s_next, ps, cfg, Branch::momentum, false);
  Graph::Var logits = db_logits_g(g, u_pred, u_next, ps, false);
  return g.value(g.diag_logsoftmax_mean(logits)).data[0];
}

double loss_i_upper(const std::vector<GaussianDiag>& posteriors) {
  if (posteriors.empty()) throw ConfigError("loss_i_upper: empty batch");
  double acc = 0.0;
  for (const GaussianDiag& p : posteriors) acc += kl_to_standard_normal(p);
  return acc / static_cast<double>(posteriors.size());
}

LossBreakdown db_loss_build(Graph& g, const DBBatch& batch, const ParamSet& ps,
                            const DBConfig& cfg, const Tensor& eps, Graph::Var& total) {
  std::size_t b = batch.obs.rows();
  if (b < 2) throw ConfigError("db loss: batch of at least 2 transitions required");
  if (batch.actions.size() != b || batch.next_obs.rows() != b) {
    throw DimensionError("db loss: ragged batch");
  }
  if (eps.rows() != b || eps.cols() != cfg.latent_dim) {
    throw DimensionError("db loss: eps must be [B, latent_dim]");
  }

  Graph::Var s = db_encode_g(g, g.constant(batch.obs), ps, cfg, Branch::online, true);
  // target branch: detached momentum encodings, unless the encoder is shared,
  // in which case gradients deliberately flow into the target
  Graph::Var s_next;
  if (cfg.shared_encoder) {
    s_next = db_encode_g(g, g.constant(batch.next_obs), ps, cfg, Branch::momentum, true);
  } else {
    s_next = g.constant(encode_batch(batch.next_obs, Branch::momentum, ps, cfg));
  }

  GaussVars post = db_posterior_g(g, s, batch.actions, ps, cfg, true);
  Graph::Var i_upper = g.mean_all(kl_std_normal_rows(g, post.mean, post.std));

  Graph::Var z = g.add(post.mean, g.mul(post.std, g.constant(eps)));
  GaussVars pred = db_predict_g(g, z, ps, cfg, true);
  Graph::Var i_pred = g.mean_all(
      shared_sigma_logdensity_rows(g, s_next, pred.mean, pred.std, cfg.encoding_dim));

  Graph::Var u_pred = db_project_g(g, pred.mean, ps, cfg, Branch::online, true);
  Graph::Var u_next = db_project_g(g, s_next, ps, cfg, Branch::momentum, true);
  Graph::Var logits = db_logits_g(g, u_pred, u_next, ps, true);
  Graph::Var i_nce = g.diag_logsoftmax_mean(logits);

  total = g.add(g.add(g.scale(i_upper, cfg.alpha1), g.scale(i_pred, -cfg.alpha2)),
                g.scale(i_nce, -cfg.alpha3));

  LossBreakdown bd;
  bd.i_pred = g.value(i_pred).data[0];
  bd.i_nce = g.value(i_nce).data[0];
  bd.i_upper = g.value(i_upper).data[0];
  bd.total = g.value(total).data[0];
  bd.batch_size = b;
  return bd;
}

LossBreakdown db_loss_eval(const DBBatch& batch, const ParamSet& ps, const DBConfig& cfg,
                           const Tensor& eps) {
  Graph g;
  Graph::Var total;
  return db_loss_build(g, batch, ps, cfg, eps, total);
}

LossBreakdown db_train_step(const DBBatch& batch, ParamSet& ps, const DBConfig& cfg,
                            AdamOptimizer& opt, RngStream& rng) {
  Tensor eps({batch.obs.rows(), cfg.latent_dim});
  for (double& e : eps.data) e = rng.normal();

  Graph g;
  Graph::Var total;
  LossBreakdown bd = db_loss_build(g, batch, ps, cfg, eps, total);
  if (!std::isfinite(bd.total)) {
    throw NumericError("db_train_step: non-finite loss, step aborted");
  }
  g.backward(total);

  ParamSet grads;
  for (const std::string& name : db_trainable_names(cfg)) {
    if (g.has_param(name)) grads.add(name, g.param_grad(name));
  }
  opt.step(ps, grads);
  // shared mode keeps the mirror exactly equal (tau = 0 blending)
  db_momentum_update(ps, cfg.shared_encoder ? 0.0 : cfg.tau);
  return bd;
}

NceBoundReport exact_nce_bound_check(const Tensor& joint, const Tensor& score_table,
                                     int negatives) {
  if (joint.rank() != 2) throw ConfigError("nce bound: joint must be rank-2");
  if (!joint.same_shape(score_table)) {
    throw DimensionError("nce bound: score table shape must match joint");
  }
  if (joint.numel() > 64) throw ConfigError("nce bound: joint larger than 64 cells");
  if (negatives < 1 || negatives > 3) throw ConfigError("nce bound: N must be 1, 2 or 3");
  double mass = 0.0;
  for (double p : joint.data) {
    if (p < 0.0) throw ConfigError("nce bound: negative probability");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9) throw ConfigError("nce bound: joint not normalized");

  std::size_t nz = joint.rows(), ns = joint.cols();
  std::vector<double> pz(nz, 0.0), psp(ns, 0.0);
  for (std::size_t i = 0; i < nz; ++i) {
    for (std::size_t j = 0; j < ns; ++j) {
      pz[i] += joint.at(i, j);
      psp[j] += joint.at(i, j);
    }
  }

  double mi = 0.0;
  for (std::size_t i = 0; i < nz; ++i) {
    for (std::size_t j = 0; j < ns; ++j) {
      double p = joint.at(i, j);
      if (p > 0.0) mi += p * std::log(p / (pz[i] * psp[j]));
    }
  }

  // exact expectation over the positive pair and all negative tuples drawn
  // i.i.d. from the s' marginal
  int n = negatives;
  double l_nce = 0.0;
  std::vector<double> scores(static_cast<std::size_t>(n) + 1);
  std::vector<std::size_t> tuple(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < nz; ++i) {
    for (std::size_t j = 0; j < ns; ++j) {
      double p = joint.at(i, j);
      if (p == 0.0) continue;
      double pos = score_table.at(i, j);
      std::fill(tuple.begin(), tuple.end(), 0);
      while (true) {
        double w = p;
        scores[0] = pos;
        for (int k = 0; k < n; ++k) {
          w *= psp[tuple[static_cast<std::size_t>(k)]];
          scores[static_cast<std::size_t>(k) + 1] = score_table.at(i, tuple[static_cast<std::size_t>(k)]);
        }
        if (w > 0.0) l_nce += w * (pos - lse(scores));
        int k = 0;
        for (; k < n; ++k) {
          if (++tuple[static_cast<std::size_t>(k)] < ns) break;
          tuple[static_cast<std::size_t>(k)] = 0;
        }
        if (k == n) break;
      }
    }
  }

  NceBoundReport report;
  report.mutual_information = mi;
  report.l_nce = l_nce;
  report.negatives = n;
  report.bound = std::log(static_cast<double>(n)) + l_nce;
  report.holds = report.bound <= mi + 1e-9;
  return report;
}

}  // namespace ibx

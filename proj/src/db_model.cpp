#include "ibx/db_model.hpp"

#include "ibx/error.hpp"

namespace ibx {

namespace {

constexpr double kLeakySlope = 0.01;

// parameter leaf when trainable, frozen constant otherwise
Graph::Var leaf(Graph& g, const ParamSet& ps, const std::string& name, bool trainable) {
  return trainable ? g.param(name, ps.at(name)) : g.constant(ps.at(name));
}

Graph::Var linear(Graph& g, Graph::Var x, const ParamSet& ps, const std::string& prefix,
                  bool trainable) {
  Graph::Var w = leaf(g, ps, prefix + ".w", trainable);
  Graph::Var b = leaf(g, ps, prefix + ".b", trainable);
  return g.add_rowvec(g.matmul(x, w), b);
}

// y = lrelu(x + L1(lrelu(L0(x)))), both layers width-preserving
Graph::Var residual_block(Graph& g, Graph::Var x, const ParamSet& ps, const std::string& prefix,
                          bool trainable) {
  Graph::Var h = g.leaky_relu(linear(g, x, ps, prefix + ".0", trainable), kLeakySlope);
  Graph::Var r = linear(g, h, ps, prefix + ".1", trainable);
  return g.leaky_relu(g.add(x, r), kLeakySlope);
}

std::string enc_prefix(const DBConfig& cfg, Branch branch) {
  if (cfg.shared_encoder) return "enc_o";
  return branch == Branch::online ? "enc_o" : "enc_m";
}

Tensor single_row(const Tensor& v) {
  if (v.rank() != 1) throw DimensionError("expected rank-1 input, got " + shape_str(v));
  return Tensor({1, v.numel()}, v.data);
}

Tensor row_to_vec(const Tensor& m) { return Tensor({m.numel()}, m.data); }

}  // namespace

void DBConfig::validate() const {
  if (obs_dim == 0 || action_count == 0 || encoding_dim == 0 || latent_dim == 0 ||
      projection_dim == 0 || enc_hidden == 0 || post_hidden == 0 || pred_hidden == 0 ||
      proj_hidden == 0) {
    throw ConfigError("db config: all dimensions must be positive");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("db config: tau must lie in [0,1]");
  if (alpha1 < 0.0 || alpha2 < 0.0 || alpha3 < 0.0) {
    throw ConfigError("db config: loss weights must be >= 0");
  }
  if (learning_rate <= 0.0) throw ConfigError("db config: learning_rate must be > 0");
  if (post_init_gain <= 0.0) throw ConfigError("db config: post_init_gain must be > 0");
  if (updates_per_episode == 0) {
    throw ConfigError("db config: updates_per_episode must be >= 1");
  }
}

ParamSet init_db_params(const DBConfig& cfg, RngStream& rng) {
  cfg.validate();
  ParamSet ps;
  add_linear(ps, "enc_o.0", cfg.obs_dim, cfg.enc_hidden, rng);
  add_linear(ps, "enc_o.1", cfg.enc_hidden, cfg.encoding_dim, rng);
  add_linear(ps, "post.in", cfg.encoding_dim + cfg.action_count, cfg.post_hidden, rng);
  add_linear(ps, "post.res.0", cfg.post_hidden, cfg.post_hidden, rng);
  add_linear(ps, "post.res.1", cfg.post_hidden, cfg.post_hidden, rng);
  add_linear(ps, "post.mu", cfg.post_hidden, cfg.latent_dim, rng);
  for (double& v : ps.at("post.mu.w").data) v *= cfg.post_init_gain;
  add_linear(ps, "post.sig", cfg.post_hidden, cfg.latent_dim, rng);
  add_linear(ps, "pred.in", cfg.latent_dim, cfg.pred_hidden, rng);
  add_linear(ps, "pred.res.0", cfg.pred_hidden, cfg.pred_hidden, rng);
  add_linear(ps, "pred.res.1", cfg.pred_hidden, cfg.pred_hidden, rng);
  add_linear(ps, "pred.mu", cfg.pred_hidden, cfg.encoding_dim, rng);
  add_linear(ps, "pred.sig", cfg.pred_hidden, 1, rng);
  add_linear(ps, "proj_o.0", cfg.encoding_dim, cfg.proj_hidden, rng);
  add_linear(ps, "proj_o.1", cfg.proj_hidden, cfg.projection_dim, rng);
  {
    Tensor w({cfg.projection_dim, cfg.projection_dim});
    double limit = std::sqrt(6.0 / static_cast<double>(cfg.projection_dim));
    for (double& x : w.data) x = (2.0 * rng.uniform() - 1.0) * limit;
    ps.add("score.W", std::move(w));
  }
  // momentum copies start equal to their online twins
  for (const char* pair : {"enc_o.0", "enc_o.1"}) {
    std::string m = std::string("enc_m") + (pair + 5);
    ps.add(m + ".w", ps.at(std::string(pair) + ".w"));
    ps.add(m + ".b", ps.at(std::string(pair) + ".b"));
  }
  for (const char* pair : {"proj_o.0", "proj_o.1"}) {
    std::string m = std::string("proj_m") + (pair + 6);
    ps.add(m + ".w", ps.at(std::string(pair) + ".w"));
    ps.add(m + ".b", ps.at(std::string(pair) + ".b"));
  }
  return ps;
}

std::vector<std::string> db_trainable_names(const DBConfig&) {
  return {"enc_o.0.w",  "enc_o.0.b",  "enc_o.1.w",  "enc_o.1.b",  "post.in.w",   "post.in.b",
          "post.res.0.w", "post.res.0.b", "post.res.1.w", "post.res.1.b", "post.mu.w",   "post.mu.b",
          "post.sig.w", "post.sig.b", "pred.in.w",  "pred.in.b",  "pred.res.0.w", "pred.res.0.b",
          "pred.res.1.w", "pred.res.1.b", "pred.mu.w",  "pred.mu.b",  "pred.sig.w",  "pred.sig.b",
          "proj_o.0.w", "proj_o.0.b", "proj_o.1.w", "proj_o.1.b", "score.W"};
}

void db_momentum_update(ParamSet& ps, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("momentum update: tau must lie in [0,1]");
  const std::pair<const char*, const char*> pairs[] = {
      {"enc_o.0", "enc_m.0"}, {"enc_o.1", "enc_m.1"}, {"proj_o.0", "proj_m.0"},
      {"proj_o.1", "proj_m.1"}};
  for (const auto& [on, mo] : pairs) {
    for (const char* suffix : {".w", ".b"}) {
      const Tensor& o = ps.at(std::string(on) + suffix);
      Tensor& m = ps.at(std::string(mo) + suffix);
      for (std::size_t i = 0; i < m.numel(); ++i) {
        m.data[i] = tau * m.data[i] + (1.0 - tau) * o.data[i];
      }
    }
  }
}

Graph::Var db_encode_g(Graph& g, Graph::Var obs, const ParamSet& ps, const DBConfig& cfg,
                       Branch branch, bool trainable) {
  if (g.value(obs).cols() != cfg.obs_dim) {
    throw DimensionError("encode: obs dim " + std::to_string(g.value(obs).cols()) +
                         " != " + std::to_string(cfg.obs_dim));
  }
  std::string p = enc_prefix(cfg, branch);
  bool train = trainable && (branch == Branch::online || cfg.shared_encoder);
  Graph::Var h = g.leaky_relu(linear(g, obs, ps, p + ".0", train), kLeakySlope);
  return g.leaky_relu(linear(g, h, ps, p + ".1", train), kLeakySlope);
}

GaussVars db_posterior_g(Graph& g, Graph::Var s, const std::vector<int>& actions,
                         const ParamSet& ps, const DBConfig& cfg, bool trainable) {
  if (g.value(s).cols() != cfg.encoding_dim) {
    throw DimensionError("posterior: encoding dim mismatch");
  }
  if (g.value(s).rows() != actions.size()) {
    throw DimensionError("posterior: one action per row required");
  }
  for (int a : actions) {
    if (a < 0 || static_cast<std::size_t>(a) >= cfg.action_count) {
      throw DimensionError("posterior: invalid action index");
    }
  }
  Graph::Var x = g.concat_cols(s, g.constant(onehot_rows(actions, cfg.action_count)));
  Graph::Var h = g.leaky_relu(linear(g, x, ps, "post.in", trainable), kLeakySlope);
  h = residual_block(g, h, ps, "post.res", trainable);
  Graph::Var mean = linear(g, h, ps, "post.mu", trainable);
  Graph::Var std = g.add_scalar(g.softplus(linear(g, h, ps, "post.sig", trainable)), kStdFloor);
  return {mean, std};
}

GaussVars db_predict_g(Graph& g, Graph::Var z, const ParamSet& ps, const DBConfig& cfg,
                       bool trainable) {
  if (g.value(z).cols() != cfg.latent_dim) {
    throw DimensionError("predict: latent dim mismatch");
  }
  Graph::Var h = g.leaky_relu(linear(g, z, ps, "pred.in", trainable), kLeakySlope);
  h = residual_block(g, h, ps, "pred.res", trainable);
  Graph::Var mean = linear(g, h, ps, "pred.mu", trainable);
  Graph::Var std = g.add_scalar(g.softplus(linear(g, h, ps, "pred.sig", trainable)), kStdFloor);
  return {mean, std};  // std: [B,1] shared across encoding dims
}

Graph::Var db_project_g(Graph& g, Graph::Var v, const ParamSet& ps, const DBConfig& cfg,
                        Branch branch, bool trainable) {
  if (g.value(v).cols() != cfg.encoding_dim) {
    throw DimensionError("project: encoding dim mismatch");
  }
  std::string p = branch == Branch::online ? "proj_o" : "proj_m";
  bool train = trainable && branch == Branch::online;
  Graph::Var h = g.l2_normalize_rows(
      g.leaky_relu(linear(g, v, ps, p + ".0", train), kLeakySlope));
  return g.l2_normalize_rows(linear(g, h, ps, p + ".1", train));
}

Graph::Var db_logits_g(Graph& g, Graph::Var u_pred, Graph::Var u_next, const ParamSet& ps,
                       bool trainable) {
  const Tensor& w = ps.at("score.W");
  if (g.value(u_pred).cols() != w.rows() || g.value(u_next).cols() != w.cols()) {
    throw DimensionError("score: projection dim mismatch");
  }
  Graph::Var wv = trainable ? g.param("score.W", w) : g.constant(w);
  return g.matmul(g.matmul(u_pred, wv), g.transpose(u_next));
}

Tensor encode(const Tensor& obs, Branch branch, const ParamSet& ps, const DBConfig& cfg) {
  Graph g;
  Graph::Var out = db_encode_g(g, g.constant(single_row(obs)), ps, cfg, branch, false);
  return row_to_vec(g.value(out));
}

GaussianDiag posterior(const Tensor& s, int action, const ParamSet& ps, const DBConfig& cfg) {
  Graph g;
  GaussVars gv = db_posterior_g(g, g.constant(single_row(s)), {action}, ps, cfg, false);
  return GaussianDiag(row_to_vec(g.value(gv.mean)), row_to_vec(g.value(gv.std)));
}

GaussianDiag predict_next(const Tensor& z, const ParamSet& ps, const DBConfig& cfg) {
  Graph g;
  GaussVars gv = db_predict_g(g, g.constant(single_row(z)), ps, cfg, false);
  Tensor mean = row_to_vec(g.value(gv.mean));
  Tensor std = Tensor::full({mean.numel()}, g.value(gv.std).data[0]);
  return GaussianDiag(std::move(mean), std::move(std));
}

Tensor project(const Tensor& v, Branch branch, const ParamSet& ps, const DBConfig& cfg) {
  Graph g;
  Graph::Var out = db_project_g(g, g.constant(single_row(v)), ps, cfg, branch, false);
  return row_to_vec(g.value(out));
}

double score(const Tensor& u_pred, const Tensor& u_next, const Tensor& w) {
  if (u_pred.numel() != w.rows() || u_next.numel() != w.cols()) {
    throw DimensionError("score: dim mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double wi = 0.0;
    for (std::size_t j = 0; j < w.cols(); ++j) wi += w.at(i, j) * u_next.data[j];
    acc += u_pred.data[i] * wi;
  }
  return acc;
}

Tensor encode_batch(const Tensor& obs, Branch branch, const ParamSet& ps, const DBConfig& cfg) {
  Graph g;
  Graph::Var out = db_encode_g(g, g.constant(obs), ps, cfg, branch, false);
  return g.value(out);
}

void posterior_batch(const Tensor& obs, const std::vector<int>& actions, const ParamSet& ps,
                     const DBConfig& cfg, Tensor& mean_out, Tensor& std_out) {
  Graph g;
  Graph::Var s = db_encode_g(g, g.constant(obs), ps, cfg, Branch::online, false);
  GaussVars gv = db_posterior_g(g, s, actions, ps, cfg, false);
  mean_out = g.value(gv.mean);
  std_out = g.value(gv.std);
}

Tensor onehot_rows(const std::vector<int>& indices, std::size_t n) {
  Tensor t({indices.size(), n});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    t.data[i * n + static_cast<std::size_t>(indices[i])] = 1.0;
  }
  return t;
}

}  // namespace ibx

#include "ibx/policy.hpp"

#include <cmath>

#include "ibx/error.hpp"

namespace ibx {

namespace {
constexpr double kLeakySlope = 0.01;
}

ParamSet init_policy_params(const PolicyConfig& cfg, RngStream& rng) {
  if (cfg.obs_dim == 0 || cfg.action_count == 0 || cfg.hidden1 == 0 || cfg.hidden2 == 0) {
    throw ConfigError("policy config: all dimensions must be positive");
  }
  ParamSet ps;
  add_linear(ps, "pol.trunk.0", cfg.obs_dim, cfg.hidden1, rng);
  add_linear(ps, "pol.trunk.1", cfg.hidden1, cfg.hidden2, rng);
  add_linear(ps, "pol.pi", cfg.hidden2, cfg.action_count, rng);
  add_linear(ps, "pol.v", cfg.hidden2, 1, rng);
  return ps;
}

PolicyVars policy_forward_g(Graph& g, Graph::Var obs, const ParamSet& ps,
                            const PolicyConfig& cfg, bool trainable) {
  if (g.value(obs).cols() != cfg.obs_dim) {
    throw DimensionError("policy: obs dim mismatch");
  }
  auto leaf = [&](const std::string& name) {
    return trainable ? g.param(name, ps.at(name)) : g.constant(ps.at(name));
  };
  auto linear = [&](Graph::Var x, const std::string& prefix) {
    return g.add_rowvec(g.matmul(x, leaf(prefix + ".w")), leaf(prefix + ".b"));
  };
  Graph::Var h = g.leaky_relu(linear(obs, "pol.trunk.0"), kLeakySlope);
  h = g.leaky_relu(linear(h, "pol.trunk.1"), kLeakySlope);
  return {linear(h, "pol.pi"), linear(h, "pol.v")};
}

PolicyEval policy_forward(const Tensor& obs, const ParamSet& ps, const PolicyConfig& cfg) {
  Tensor batch = obs.rank() == 1 ? Tensor({1, obs.numel()}, obs.data) : obs;
  Graph g;
  PolicyVars pv = policy_forward_g(g, g.constant(batch), ps, cfg, false);
  PolicyEval out;
  out.logits = g.value(pv.logits);
  std::size_t b = out.logits.rows(), a = out.logits.cols();
  out.probs = Tensor({b, a});
  for (std::size_t i = 0; i < b; ++i) {
    double mx = out.logits.at(i, 0);
    for (std::size_t j = 1; j < a; ++j) mx = std::max(mx, out.logits.at(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < a; ++j) {
      out.probs.at(i, j) = std::exp(out.logits.at(i, j) - mx);
      z += out.probs.at(i, j);
    }
    for (std::size_t j = 0; j < a; ++j) out.probs.at(i, j) /= z;
  }
  const Tensor& v = g.value(pv.value);
  out.value = Tensor({b});
  for (std::size_t i = 0; i < b; ++i) out.value.data[i] = v.data[i];
  return out;
}

int sample_action(const Tensor& probs, std::size_t row, RngStream& rng) {
  std::size_t a = probs.cols();
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t j = 0; j < a; ++j) {
    acc += probs.at(row, j);
    if (u < acc) return static_cast<int>(j);
  }
  return static_cast<int>(a - 1);
}

}  // namespace ibx

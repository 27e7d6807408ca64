#pragma once

#include <vector>

#include "ibx/graph.hpp"
#include "ibx/params.hpp"
#include "ibx/rng.hpp"

namespace ibx {

struct PolicyConfig {
  std::size_t obs_dim = 80;
  std::size_t action_count = 4;
  std::size_t hidden1 = 128;
  std::size_t hidden2 = 64;
};

// shared trunk, softmax policy head and scalar value head split at the top
ParamSet init_policy_params(const PolicyConfig& cfg, RngStream& rng);

struct PolicyVars {
  Graph::Var logits;  // [B, A]
  Graph::Var value;   // [B, 1]
};
PolicyVars policy_forward_g(Graph& g, Graph::Var obs, const ParamSet& ps,
                            const PolicyConfig& cfg, bool trainable);

struct PolicyEval {
  Tensor probs;   // [B, A], rows sum to 1
  Tensor logits;  // [B, A]
  Tensor value;   // [B]
};
PolicyEval policy_forward(const Tensor& obs, const ParamSet& ps, const PolicyConfig& cfg);

int sample_action(const Tensor& probs, std::size_t row, RngStream& rng);

}  // namespace ibx

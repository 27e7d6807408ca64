#pragma once

#include <cstdint>
#include <vector>

#include "ibx/rng.hpp"
#include "ibx/tensor.hpp"

namespace ibx {

struct TabularMDP {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t start_state = 0;
  std::vector<double> transition;  // [s][a][s'] flat

  double prob(std::size_t s, std::size_t a, std::size_t s2) const {
    return transition[(s * n_actions + a) * n_states + s2];
  }
  double& prob_ref(std::size_t s, std::size_t a, std::size_t s2) {
    return transition[(s * n_actions + a) * n_states + s2];
  }
  void validate() const;  // each row sums to 1 within 1e-12

  // deterministic left/right chain; the last state absorbs for both actions
  static TabularMDP chain(std::size_t n);
  static constexpr std::size_t kLeft = 0, kRight = 1;
};

std::size_t tabular_step(const TabularMDP& mdp, std::size_t s, std::size_t a, RngStream& rng);

// Finite MDP with a known feature map eta(s,a), ||eta||_2 <= 1. Extrinsic
// rewards live here for the optimistic value-iteration setting only.
struct LinearMDP {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t horizon = 0;
  std::size_t feature_dim = 0;
  std::size_t start_state = 0;
  std::vector<Tensor> features;    // [s*n_actions + a]
  std::vector<double> transition;  // [s][a][s'] flat
  std::vector<double> reward;      // [s*n_actions + a]

  double prob(std::size_t s, std::size_t a, std::size_t s2) const {
    return transition[(s * n_actions + a) * n_states + s2];
  }
  void validate() const;
};

Tensor linear_features(const LinearMDP& mdp, std::size_t s, std::size_t a);
std::size_t linear_step(const LinearMDP& mdp, std::size_t s, std::size_t a, RngStream& rng);

// one-hot feature embedding of a tabular MDP (d = |S|*|A|)
LinearMDP tabular_embedded_linear(const TabularMDP& mdp, std::vector<double> reward,
                                  std::size_t horizon);

// random transitions with unit-ball features, reproducible from the seed
LinearMDP random_feature_linear(std::size_t n_states, std::size_t n_actions,
                                std::size_t feature_dim, std::size_t horizon,
                                std::uint64_t seed);

// Two-state escape task: action 1 in state 0 leads to the absorbing state 1
// where every action pays 1. The deceptive variant pays 0.1 for looping in
// state 0, which traps greedy (no-optimism) value iteration. The short
// horizon keeps the escape reachable for a unit optimism coefficient.
LinearMDP two_state_explore_mdp(bool deceptive, std::size_t horizon = 2);

}  // namespace ibx

#include "ibx/mdp.hpp"

#include <cmath>

#include "ibx/error.hpp"

namespace ibx {

namespace {

void check_rows(const std::vector<double>& transition, std::size_t n_states,
                std::size_t n_actions) {
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (std::size_t s2 = 0; s2 < n_states; ++s2) {
        double p = transition[(s * n_actions + a) * n_states + s2];
        if (p < 0.0) throw ConfigError("mdp: negative transition probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw ConfigError("mdp: transition row (" + std::to_string(s) + "," +
                          std::to_string(a) + ") sums to " + std::to_string(sum));
      }
    }
  }
}

std::size_t sample_row(const double* row, std::size_t n, RngStream& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t s2 = 0; s2 < n; ++s2) {
    acc += row[s2];
    if (u < acc) return s2;
  }
  // numerical remainder: last state with nonzero mass
  for (std::size_t s2 = n; s2 > 0; --s2) {
    if (row[s2 - 1] > 0.0) return s2 - 1;
  }
  return n - 1;
}

}  // namespace

void TabularMDP::validate() const {
  if (n_states == 0 || n_actions == 0) throw ConfigError("mdp: empty state or action space");
  if (transition.size() != n_states * n_actions * n_states) {
    throw ConfigError("mdp: transition table size mismatch");
  }
  check_rows(transition, n_states, n_actions);
}

TabularMDP TabularMDP::chain(std::size_t n) {
  TabularMDP m;
  m.n_states = n;
  m.n_actions = 2;
  m.start_state = 0;
  m.transition.assign(n * 2 * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (s + 1 == n) {
      m.prob_ref(s, kLeft, s) = 1.0;
      m.prob_ref(s, kRight, s) = 1.0;
      continue;
    }
    m.prob_ref(s, kLeft, s == 0 ? 0 : s - 1) = 1.0;
    m.prob_ref(s, kRight, s + 1) = 1.0;
  }
  return m;
}

std::size_t tabular_step(const TabularMDP& mdp, std::size_t s, std::size_t a, RngStream& rng) {
  if (s >= mdp.n_states || a >= mdp.n_actions) {
    throw DimensionError("tabular_step: state or action index out of range");
  }
  return sample_row(&mdp.transition[(s * mdp.n_actions + a) * mdp.n_states], mdp.n_states, rng);
}

void LinearMDP::validate() const {
  if (n_states == 0 || n_actions == 0) throw ConfigError("linear mdp: empty spaces");
  if (features.size() != n_states * n_actions) throw ConfigError("linear mdp: feature count");
  if (reward.size() != n_states * n_actions) throw ConfigError("linear mdp: reward count");
  check_rows(transition, n_states, n_actions);
  for (const Tensor& f : features) {
    if (f.numel() != feature_dim) throw ConfigError("linear mdp: feature dim mismatch");
    double norm2 = 0.0;
    for (double x : f.data) norm2 += x * x;
    if (norm2 > 1.0 + 1e-12) throw ConfigError("linear mdp: feature norm exceeds 1");
  }
}

Tensor linear_features(const LinearMDP& mdp, std::size_t s, std::size_t a) {
  if (s >= mdp.n_states || a >= mdp.n_actions) {
    throw DimensionError("linear_features: index out of range");
  }
  return mdp.features[s * mdp.n_actions + a];
}

std::size_t linear_step(const LinearMDP& mdp, std::size_t s, std::size_t a, RngStream& rng) {
  if (s >= mdp.n_states || a >= mdp.n_actions) {
    throw DimensionError("linear_step: index out of range");
  }
  return sample_row(&mdp.transition[(s * mdp.n_actions + a) * mdp.n_states], mdp.n_states, rng);
}

LinearMDP tabular_embedded_linear(const TabularMDP& mdp, std::vector<double> reward,
                                  std::size_t horizon) {
  mdp.validate();
  LinearMDP lm;
  lm.n_states = mdp.n_states;
  lm.n_actions = mdp.n_actions;
  lm.horizon = horizon;
  lm.feature_dim = mdp.n_states * mdp.n_actions;
  lm.start_state = mdp.start_state;
  lm.transition = mdp.transition;
  lm.reward = std::move(reward);
  for (std::size_t i = 0; i < lm.feature_dim; ++i) {
    Tensor f({lm.feature_dim});
    f.data[i] = 1.0;
    lm.features.push_back(std::move(f));
  }
  lm.validate();
  return lm;
}

LinearMDP random_feature_linear(std::size_t n_states, std::size_t n_actions,
                                std::size_t feature_dim, std::size_t horizon,
                                std::uint64_t seed) {
  RngStream rng(seed);
  LinearMDP lm;
  lm.n_states = n_states;
  lm.n_actions = n_actions;
  lm.horizon = horizon;
  lm.feature_dim = feature_dim;
  lm.start_state = 0;
  lm.transition.assign(n_states * n_actions * n_states, 0.0);
  lm.reward.assign(n_states * n_actions, 0.0);
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      std::vector<double> row(n_states);
      for (double& p : row) {
        p = rng.uniform() + 1e-3;
        sum += p;
      }
      for (std::size_t s2 = 0; s2 < n_states; ++s2) {
        lm.transition[(s * n_actions + a) * n_states + s2] = row[s2] / sum;
      }
      lm.reward[s * n_actions + a] = rng.uniform();
    }
  }
  // renormalize rows exactly: force the largest entry to absorb the residual
  for (std::size_t r = 0; r < n_states * n_actions; ++r) {
    double* row = &lm.transition[r * n_states];
    double sum = 0.0;
    std::size_t arg = 0;
    for (std::size_t s2 = 0; s2 < n_states; ++s2) {
      sum += row[s2];
      if (row[s2] > row[arg]) arg = s2;
    }
    row[arg] += 1.0 - sum;
  }
  for (std::size_t i = 0; i < n_states * n_actions; ++i) {
    Tensor f({feature_dim});
    double norm2 = 0.0;
    for (double& x : f.data) {
      x = rng.normal();
      norm2 += x * x;
    }
    double r = std::sqrt(norm2);
    double target = rng.uniform();  // radius in (0,1)
    for (double& x : f.data) x = x / r * target;
    lm.features.push_back(std::move(f));
  }
  lm.validate();
  return lm;
}

LinearMDP two_state_explore_mdp(bool deceptive, std::size_t horizon) {
  TabularMDP m;
  m.n_states = 2;
  m.n_actions = 2;
  m.start_state = 0;
  m.transition.assign(2 * 2 * 2, 0.0);
  m.prob_ref(0, 0, 0) = 1.0;  // loop in state 0
  m.prob_ref(0, 1, 1) = 1.0;  // escape to state 1
  m.prob_ref(1, 0, 1) = 1.0;  // state 1 absorbs
  m.prob_ref(1, 1, 1) = 1.0;
  std::vector<double> reward = {deceptive ? 0.1 : 0.0, 0.0, 1.0, 1.0};
  return tabular_embedded_linear(m, std::move(reward), horizon);
}

}  // namespace ibx

#pragma once

#include <vector>

#include "ibx/gram.hpp"
#include "ibx/mdp.hpp"
#include "ibx/rng.hpp"

namespace ibx {

// sqrt(c/4)*b <= sqrt(info gain) <= sqrt(c/2)*b with b = sqrt(eta^T Lambda^-1 eta)
struct BoundReport {
  double lower = 0.0;
  double mid = 0.0;
  double upper = 0.0;
  bool pass = false;
};

// random Gram histories with ||eta|| <= 1 and the given ridge (>= 1); every
// trial must satisfy the bracket to 1e-9
std::vector<BoundReport> verify_theorem1(std::size_t trials, std::size_t dim, double c,
                                         double ridge, RngStream& rng);

struct CountBonusRow {
  double n = 0.0;
  double exact = 0.0;   // sqrt((c/2) log(1 + 1/(n+ridge)))
  double approx = 0.0;  // sqrt(c/2) / sqrt(n+ridge)
  double rel_error = 0.0;
};

struct Theorem2Report {
  std::vector<CountBonusRow> rows;
  bool below_half_percent_from_50 = false;
  bool monotone_decreasing = false;
};

Theorem2Report verify_theorem2(const std::vector<double>& counts, double ridge,
                               std::size_t state_count);

struct LsviResult {
  std::vector<double> episode_returns;
  double optimal_return = 0.0;
  double regret_proxy = 0.0;  // sum over episodes of (optimal - achieved)
};

// Optimistic least-squares value iteration: greedy episodes against the
// truncated optimistic Q, then per-step ridge regression backwards in time.
// With no data yet the prior Q is the truncation value T everywhere.
LsviResult lsvi_ucb_run(const LinearMDP& mdp, std::size_t episodes, double beta, double ridge,
                        RngStream& rng);

// exact expected return of the best deterministic time-dependent policy
double optimal_return_by_enumeration(const LinearMDP& mdp);

}  // namespace ibx

#include "ibx/theory.hpp"

#include <algorithm>
#include <cmath>

#include "ibx/error.hpp"

namespace ibx {

namespace {

Tensor random_ball_vector(std::size_t dim, RngStream& rng, double radius) {
  Tensor v({dim});
  double norm2 = 0.0;
  for (double& x : v.data) {
    x = rng.normal();
    norm2 += x * x;
  }
  double r = std::sqrt(norm2);
  if (r == 0.0) return v;
  for (double& x : v.data) x = x / r * radius;
  return v;
}

}  // namespace

std::vector<BoundReport> verify_theorem1(std::size_t trials, std::size_t dim, double c,
                                         double ridge, RngStream& rng) {
  if (ridge < 1.0) throw ConfigError("theorem1: ridge must be >= 1");
  if (c < 1.0) throw ConfigError("theorem1: c must be >= 1");
  std::vector<BoundReport> reports;
  reports.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    GramAccumulator acc(dim, ridge);
    std::size_t m = rng.uniform_int(41);
    for (std::size_t i = 0; i < m; ++i) {
      acc.update(random_ball_vector(dim, rng, rng.uniform()));
    }
    // hit the ||eta|| = 1 boundary on a fixed fraction of trials
    double radius = (t % 8 == 0) ? 1.0 : rng.uniform();
    Tensor eta = random_ball_vector(dim, rng, radius);
    double b = std::sqrt(acc.quad_inv(eta));
    BoundReport r;
    r.lower = std::sqrt(c / 4.0) * b;
    r.mid = std::sqrt(info_gain_linear(eta, acc, c));
    r.upper = std::sqrt(c / 2.0) * b;
    r.pass = (r.lower - 1e-9 <= r.mid) && (r.mid <= r.upper + 1e-9);
    reports.push_back(r);
  }
  return reports;
}

Theorem2Report verify_theorem2(const std::vector<double>& counts, double ridge,
                               std::size_t state_count) {
  if (!(ridge > 0.0)) throw ConfigError("theorem2: ridge must be > 0");
  if (state_count == 0) throw ConfigError("theorem2: state count must be positive");
  double c = static_cast<double>(state_count);
  Theorem2Report report;
  for (double n : counts) {
    double x = 1.0 / (n + ridge);
    CountBonusRow row;
    row.n = n;
    row.exact = std::sqrt(0.5 * c * std::log1p(x));
    row.approx = std::sqrt(0.5 * c) * std::sqrt(x);
    row.rel_error = std::abs(row.approx - row.exact) / row.exact;
    report.rows.push_back(row);
  }
  report.below_half_percent_from_50 = true;
  for (const CountBonusRow& row : report.rows) {
    if (row.n >= 50.0 && row.rel_error >= 0.005) report.below_half_percent_from_50 = false;
  }
  report.monotone_decreasing = true;
  std::vector<CountBonusRow> sorted = report.rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const CountBonusRow& a, const CountBonusRow& b) { return a.n < b.n; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (!(sorted[i].rel_error < sorted[i - 1].rel_error)) report.monotone_decreasing = false;
  }
  return report;
}

double optimal_return_by_enumeration(const LinearMDP& mdp) {
  mdp.validate();
  std::size_t slots = mdp.horizon * mdp.n_states;
  double combos_log = static_cast<double>(slots) * std::log2(static_cast<double>(mdp.n_actions));
  if (combos_log > 24.0) {
    throw ConfigError("optimal_return_by_enumeration: policy space too large");
  }
  std::size_t combos = 1;
  for (std::size_t i = 0; i < slots; ++i) combos *= mdp.n_actions;

  double best = -1e300;
  std::vector<std::size_t> policy(slots, 0);  // policy[t*S + s] = action
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t rem = code;
    for (std::size_t i = 0; i < slots; ++i) {
      policy[i] = rem % mdp.n_actions;
      rem /= mdp.n_actions;
    }
    // exact expected return via the state distribution
    std::vector<double> dist(mdp.n_states, 0.0);
    dist[mdp.start_state] = 1.0;
    double ret = 0.0;
    for (std::size_t t = 0; t < mdp.horizon; ++t) {
      std::vector<double> next(mdp.n_states, 0.0);
      for (std::size_t s = 0; s < mdp.n_states; ++s) {
        if (dist[s] == 0.0) continue;
        std::size_t a = policy[t * mdp.n_states + s];
        ret += dist[s] * mdp.reward[s * mdp.n_actions + a];
        for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) {
          next[s2] += dist[s] * mdp.prob(s, a, s2);
        }
      }
      dist = std::move(next);
    }
    best = std::max(best, ret);
  }
  return best;
}

LsviResult lsvi_ucb_run(const LinearMDP& mdp, std::size_t episodes, double beta, double ridge,
                        RngStream& rng) {
  mdp.validate();
  if (!(ridge > 0.0)) throw ConfigError("lsvi: ridge must be > 0");
  std::size_t t_len = mdp.horizon;
  std::size_t sa = mdp.n_states * mdp.n_actions;
  double horizon_cap = static_cast<double>(t_len);

  // prior (no data): truncated optimistic Q == T everywhere
  std::vector<std::vector<double>> q(t_len, std::vector<double>(sa, horizon_cap));

  std::vector<std::vector<std::size_t>> hist_s, hist_a, hist_next;
  std::vector<std::vector<double>> hist_r;

  LsviResult result;
  result.optimal_return = optimal_return_by_enumeration(mdp);

  for (std::size_t m = 0; m < episodes; ++m) {
    // act greedily w.r.t. the current optimistic Q
    std::vector<std::size_t> ep_s(t_len), ep_a(t_len), ep_next(t_len);
    std::vector<double> ep_r(t_len);
    std::size_t s = mdp.start_state;
    double ep_return = 0.0;
    for (std::size_t t = 0; t < t_len; ++t) {
      std::size_t best_a = 0;
      for (std::size_t a = 1; a < mdp.n_actions; ++a) {
        if (q[t][s * mdp.n_actions + a] > q[t][s * mdp.n_actions + best_a]) best_a = a;
      }
      std::size_t s2 = linear_step(mdp, s, best_a, rng);
      ep_s[t] = s;
      ep_a[t] = best_a;
      ep_next[t] = s2;
      ep_r[t] = mdp.reward[s * mdp.n_actions + best_a];
      ep_return += ep_r[t];
      s = s2;
    }
    hist_s.push_back(std::move(ep_s));
    hist_a.push_back(std::move(ep_a));
    hist_next.push_back(std::move(ep_next));
    hist_r.push_back(std::move(ep_r));
    result.episode_returns.push_back(ep_return);
    result.regret_proxy += result.optimal_return - ep_return;

    // backward regression pass over all collected episodes
    for (std::size_t ti = t_len; ti > 0; --ti) {
      std::size_t t = ti - 1;
      GramAccumulator acc(mdp.feature_dim, ridge);
      Tensor rhs({mdp.feature_dim});
      for (std::size_t e = 0; e < hist_s.size(); ++e) {
        const Tensor& eta = mdp.features[hist_s[e][t] * mdp.n_actions + hist_a[e][t]];
        acc.update(eta);
        double next_q = 0.0;
        if (t + 1 < t_len) {
          std::size_t s2 = hist_next[e][t];
          for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            next_q = std::max(next_q, q[t + 1][s2 * mdp.n_actions + a]);
          }
        }
        double target = hist_r[e][t] + next_q;
        for (std::size_t i = 0; i < mdp.feature_dim; ++i) {
          rhs.data[i] += eta.data[i] * target;
        }
      }
      Tensor chi = acc.solve(rhs);
      for (std::size_t idx = 0; idx < sa; ++idx) {
        const Tensor& eta = mdp.features[idx];
        double lin = 0.0;
        for (std::size_t i = 0; i < mdp.feature_dim; ++i) lin += chi.data[i] * eta.data[i];
        double opt = lin + beta * std::sqrt(acc.quad_inv(eta));
        q[t][idx] = std::min(opt, horizon_cap);
      }
    }
  }
  return result;
}

}  // namespace ibx

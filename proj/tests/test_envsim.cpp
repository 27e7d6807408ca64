#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "ibx/grid.hpp"
#include "ibx/mdp.hpp"

using namespace ibx;

TEST_CASE("grid reset renders a one-hot start") {
  NoisyGridConfig cfg;
  cfg.grid_side = 2;
  cfg.noise_dims = 0;
  NoisyGrid env(cfg, 1);
  Tensor obs = env.reset();
  CHECK(obs.data == std::vector<double>{1.0, 0.0, 0.0, 0.0});
}

TEST_CASE("grid reset with pixel noise is seeded and reproducible") {
  NoisyGridConfig cfg;
  cfg.grid_side = 2;
  cfg.noise_dims = 2;
  cfg.noise_mode = NoiseMode::pixel;
  NoisyGrid a(cfg, 99), b(cfg, 99);
  Tensor oa = a.reset(), ob = b.reset();
  CHECK(oa.data == ob.data);
  CHECK(oa.data[0] == 1.0);
  CHECK(oa.data[1] == 0.0);
  // the noise block comes from the seeded stream
  RngStream ref(99);
  CHECK(oa.data[4] == ref.normal());
  CHECK(oa.data[5] == ref.normal());
}

TEST_CASE("grid steps clip at walls and flag the goal") {
  NoisyGridConfig cfg;
  cfg.grid_side = 3;
  cfg.noise_dims = 0;
  cfg.goal_cell = 1;
  cfg.episode_len = 10;
  NoisyGrid env(cfg, 5);
  env.reset();
  Transition t = env.step(NoisyGrid::kLeft);  // wall at (0,0)
  CHECK(env.position() == 0);
  CHECK(t.executed_action == NoisyGrid::kLeft);
  CHECK(t.extrinsic_reward == 0.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(t.next_obs.data[i] == t.obs.data[i]);

  t = env.step(NoisyGrid::kRight);
  CHECK(env.position() == 1);
  CHECK(t.extrinsic_reward == 1.0);

  CHECK_THROWS_AS(env.step(7), DimensionError);
}

TEST_CASE("sticky actions never fire at probability zero") {
  NoisyGridConfig cfg;
  cfg.grid_side = 4;
  cfg.noise_dims = 0;
  cfg.episode_len = 1000;
  NoisyGrid env(cfg, 3);
  env.reset();
  RngStream rng(77);
  for (int i = 0; i < 200; ++i) {
    int a = static_cast<int>(rng.uniform_int(4));
    Transition t = env.step(a);
    CHECK(t.executed_action == a);
  }
}

TEST_CASE("sticky action frequency matches the binomial oracle") {
  NoisyGridConfig cfg;
  cfg.grid_side = 4;
  cfg.noise_dims = 0;
  cfg.sticky_prob = 0.25;
  cfg.episode_len = 1 << 20;
  NoisyGrid env(cfg, 12345);
  env.reset();
  RngStream rng(999);
  int prev_exec = -1;
  std::size_t eligible = 0, replaced = 0;
  for (int i = 0; i < 10000; ++i) {
    int a = static_cast<int>(rng.uniform_int(4));
    Transition t = env.step(a);
    if (prev_exec >= 0 && prev_exec != a) {
      ++eligible;
      if (t.executed_action != a) {
        ++replaced;
        CHECK(t.executed_action == prev_exec);
      }
    }
    prev_exec = t.executed_action;
  }
  double p_hat = static_cast<double>(replaced) / static_cast<double>(eligible);
  double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(eligible));
  CHECK(std::abs(p_hat - 0.25) < 3.0 * sigma);
}

TEST_CASE("pixel noise leaves the informative block decodable") {
  NoisyGridConfig cfg;
  cfg.grid_side = 3;
  cfg.noise_dims = 8;
  cfg.noise_mode = NoiseMode::pixel;
  cfg.episode_len = 500;
  NoisyGrid env(cfg, 21);
  env.reset();
  RngStream rng(22);
  for (int i = 0; i < 200; ++i) {
    Transition t = env.step(static_cast<int>(rng.uniform_int(4)));
    int decoded = -1;
    for (int c = 0; c < 9; ++c) {
      if (t.next_obs.data[static_cast<std::size_t>(c)] == 1.0) decoded = c;
    }
    CHECK(decoded == env.position());
  }
}

TEST_CASE("box mode with full width erases position information") {
  NoisyGridConfig cfg;
  cfg.grid_side = 2;
  cfg.noise_dims = 0;
  cfg.noise_mode = NoiseMode::box;
  cfg.box_width = 4;
  RngStream rng(8);
  Tensor obs = render_observation(2, cfg, rng);
  // every informative coordinate was overwritten by continuous noise
  for (double v : obs.data) CHECK(v != 1.0);
}

TEST_CASE("noise mode none renders zeros in the distractor block") {
  NoisyGridConfig cfg;
  cfg.grid_side = 2;
  cfg.noise_dims = 3;
  RngStream rng(8);
  Tensor obs = render_observation(1, cfg, rng);
  CHECK(obs.data[1] == 1.0);
  for (std::size_t i = 4; i < 7; ++i) CHECK(obs.data[i] == 0.0);
}

TEST_CASE("episode determinism under identical seed and actions") {
  NoisyGridConfig cfg;
  cfg.grid_side = 4;
  cfg.noise_dims = 6;
  cfg.noise_mode = NoiseMode::box;
  cfg.box_width = 5;
  cfg.sticky_prob = 0.25;
  cfg.episode_len = 64;
  NoisyGrid a(cfg, 1001), b(cfg, 1001);
  CHECK(a.reset().data == b.reset().data);
  RngStream actions(55);
  for (int t = 0; t < 64; ++t) {
    int act = static_cast<int>(actions.uniform_int(4));
    Transition ta = a.step(act);
    Transition tb = b.step(act);
    CHECK(ta.next_obs.data == tb.next_obs.data);
    CHECK(ta.executed_action == tb.executed_action);
    CHECK(ta.extrinsic_reward == tb.extrinsic_reward);
    CHECK(ta.done == tb.done);
  }
}

TEST_CASE("shuffling noise coordinates leaves informative transition counts unchanged") {
  NoisyGridConfig cfg;
  cfg.grid_side = 3;
  cfg.noise_dims = 4;
  cfg.noise_mode = NoiseMode::pixel;
  cfg.episode_len = 512;
  NoisyGrid env(cfg, 31);
  env.reset();
  RngStream rng(32);
  std::vector<Transition> batch;
  for (int i = 0; i < 400; ++i) {
    batch.push_back(env.step(static_cast<int>(rng.uniform_int(4))));
  }
  auto informative_counts = [&](const std::vector<Transition>& ts) {
    std::map<std::tuple<int, int, int>, int> counts;
    for (const Transition& t : ts) {
      int s = -1, s2 = -1;
      for (int c = 0; c < 9; ++c) {
        if (t.obs.data[static_cast<std::size_t>(c)] == 1.0) s = c;
        if (t.next_obs.data[static_cast<std::size_t>(c)] == 1.0) s2 = c;
      }
      counts[{s, t.action, s2}]++;
    }
    return counts;
  };
  auto before = informative_counts(batch);
  // shuffle the noise block across the batch
  RngStream shuffle(33);
  for (std::size_t i = batch.size(); i > 1; --i) {
    std::size_t j = shuffle.uniform_int(i);
    for (std::size_t d = 9; d < 13; ++d) {
      std::swap(batch[i - 1].obs.data[d], batch[j].obs.data[d]);
      std::swap(batch[i - 1].next_obs.data[d], batch[j].next_obs.data[d]);
    }
  }
  CHECK(informative_counts(batch) == before);
}

TEST_CASE("tabular chain steps deterministically and validates rows") {
  TabularMDP chain = TabularMDP::chain(5);
  chain.validate();
  RngStream rng(2);
  CHECK(tabular_step(chain, 0, TabularMDP::kRight, rng) == 1);
  CHECK(tabular_step(chain, 0, TabularMDP::kLeft, rng) == 0);
  // the last state absorbs
  CHECK(tabular_step(chain, 4, TabularMDP::kLeft, rng) == 4);
  CHECK(tabular_step(chain, 4, TabularMDP::kRight, rng) == 4);
  CHECK_THROWS_AS(tabular_step(chain, 9, 0, rng), DimensionError);
}

TEST_CASE("tabular sampling frequencies match the transition row") {
  TabularMDP m;
  m.n_states = 3;
  m.n_actions = 1;
  m.transition = {0.2, 0.5, 0.3, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0};
  m.validate();
  RngStream rng(77);
  std::size_t n = 100000;
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t i = 0; i < n; ++i) counts[tabular_step(m, 0, 0, rng)]++;
  for (std::size_t s2 = 0; s2 < 3; ++s2) {
    double p = m.prob(0, 0, s2);
    double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(static_cast<double>(counts[s2]) / static_cast<double>(n) - p) <=
          3.0 * sigma + 1e-12);
  }
}

TEST_CASE("linear features are unit one-hots in the tabular embedding") {
  TabularMDP chain = TabularMDP::chain(3);
  LinearMDP lm = tabular_embedded_linear(chain, std::vector<double>(6, 0.0), 4);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < 2; ++a) {
      Tensor f = linear_features(lm, s, a);
      double norm2 = 0.0;
      for (double x : f.data) norm2 += x * x;
      CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(f.data[s * 2 + a] == 1.0);
    }
  }
  CHECK_THROWS_AS(linear_features(lm, 5, 0), DimensionError);
}

TEST_CASE("random feature mdp is reproducible and respects the unit ball") {
  LinearMDP a = random_feature_linear(4, 3, 5, 6, 2024);
  LinearMDP b = random_feature_linear(4, 3, 5, 6, 2024);
  for (std::size_t i = 0; i < a.features.size(); ++i) {
    CHECK(a.features[i].data == b.features[i].data);
    double norm2 = 0.0;
    for (double x : a.features[i].data) norm2 += x * x;
    CHECK(norm2 <= 1.0 + 1e-12);
  }
  a.validate();
}

#pragma once

#include <cstdint>
#include <memory>

#include "ibx/rng.hpp"
#include "ibx/tensor.hpp"

namespace ibx {

enum class NoiseMode { none, pixel, box };

// Feature gridworld standing in for pixels: one-hot position block of G*G
// informative coordinates plus `noise_dims` distractor coordinates. Pixel mode
// fills the distractor block with fresh N(0,1) draws every step; box mode
// additionally overwrites a contiguous run of `box_width` informative
// coordinates (fresh uniform start each step) with N(0,1).
struct NoisyGridConfig {
  int grid_side = 8;
  int noise_dims = 16;
  NoiseMode noise_mode = NoiseMode::none;
  int box_width = 0;
  double sticky_prob = 0.0;
  int goal_cell = -1;  // -1: no goal
  int episode_len = 128;

  int obs_dim() const { return grid_side * grid_side + noise_dims; }
  void validate() const;
};

struct Transition {
  Tensor obs;
  int action = 0;
  Tensor next_obs;
  bool done = false;
  double extrinsic_reward = 0.0;  // logged only, never trained on
  int executed_action = 0;        // may differ from action under stickiness
};

class Env {
 public:
  virtual ~Env() = default;
  virtual Tensor reset() = 0;
  virtual Transition step(int action) = 0;
  virtual int action_count() const = 0;
  virtual int obs_dim() const = 0;
  virtual int horizon() const = 0;
  // discrete informative state for probes; -1 when unavailable
  virtual int state_index() const { return -1; }
  virtual int state_count() const { return -1; }
};

Tensor render_observation(int position, const NoisyGridConfig& cfg, RngStream& rng);

// Deterministic left/right chain presented through grid-style one-hot
// observations, optionally padded with fresh N(0,1) distractor coordinates;
// the last state absorbs. Goal at the far end when set.
class ChainEnv : public Env {
 public:
  ChainEnv(int length, int episode_len, int goal_state = -1, int noise_dims = 0,
           std::uint64_t seed = 0);

  Tensor reset() override;
  Transition step(int action) override;

  int action_count() const override { return 2; }
  int obs_dim() const override { return length_ + noise_dims_; }
  int horizon() const override { return episode_len_; }
  int state_index() const override { return pos_; }
  int state_count() const override { return length_; }

  static constexpr int kLeft = 0, kRight = 1;

 private:
  Tensor render();
  int length_;
  int episode_len_;
  int goal_state_;
  int noise_dims_;
  RngStream rng_;
  int pos_ = 0;
  int step_count_ = 0;
};

class NoisyGrid : public Env {
 public:
  NoisyGrid(NoisyGridConfig cfg, std::uint64_t seed);

  Tensor reset() override;
  Transition step(int action) override;

  int action_count() const override { return 4; }
  int obs_dim() const override { return cfg_.obs_dim(); }
  int horizon() const override { return cfg_.episode_len; }
  int state_index() const override { return pos_; }
  int state_count() const override { return cfg_.grid_side * cfg_.grid_side; }
  int position() const { return pos_; }

  static constexpr int kUp = 0, kDown = 1, kLeft = 2, kRight = 3;

 private:
  NoisyGridConfig cfg_;
  RngStream rng_;
  Tensor last_obs_;
  int pos_ = 0;
  int prev_executed_ = -1;
  int step_count_ = 0;
};

}  // namespace ibx

#include "ibx/grid.hpp"

#include "ibx/error.hpp"

namespace ibx {

void NoisyGridConfig::validate() const {
  if (grid_side < 2) throw ConfigError("grid: grid_side must be >= 2");
  if (noise_dims < 0) throw ConfigError("grid: noise_dims must be >= 0");
  if (box_width < 0 || box_width > grid_side * grid_side) {
    throw ConfigError("grid: box_width must lie in [0, grid_side^2]");
  }
  if (noise_mode == NoiseMode::box && box_width == 0) {
    throw ConfigError("grid: box mode requires box_width > 0");
  }
  if (!(sticky_prob >= 0.0 && sticky_prob <= 1.0)) {
    throw ConfigError("grid: sticky_prob must lie in [0,1]");
  }
  if (goal_cell >= grid_side * grid_side) throw ConfigError("grid: goal_cell out of range");
  if (episode_len < 1) throw ConfigError("grid: episode_len must be >= 1");
}

Tensor render_observation(int position, const NoisyGridConfig& cfg, RngStream& rng) {
  int cells = cfg.grid_side * cfg.grid_side;
  Tensor obs({static_cast<std::size_t>(cfg.obs_dim())});
  obs.data[static_cast<std::size_t>(position)] = 1.0;
  if (cfg.noise_mode == NoiseMode::pixel || cfg.noise_mode == NoiseMode::box) {
    for (int i = 0; i < cfg.noise_dims; ++i) {
      obs.data[static_cast<std::size_t>(cells + i)] = rng.normal();
    }
  }
  if (cfg.noise_mode == NoiseMode::box) {
    int span = cells - cfg.box_width;
    int start = span == 0 ? 0 : static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(span + 1)));
    for (int i = 0; i < cfg.box_width; ++i) {
      obs.data[static_cast<std::size_t>(start + i)] = rng.normal();
    }
  }
  return obs;
}

NoisyGrid::NoisyGrid(NoisyGridConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
  cfg_.validate();
}

Tensor NoisyGrid::reset() {
  pos_ = 0;
  prev_executed_ = -1;
  step_count_ = 0;
  last_obs_ = render_observation(pos_, cfg_, rng_);
  return last_obs_;
}

ChainEnv::ChainEnv(int length, int episode_len, int goal_state, int noise_dims,
                   std::uint64_t seed)
    : length_(length), episode_len_(episode_len), goal_state_(goal_state),
      noise_dims_(noise_dims), rng_(seed) {
  if (length < 2) throw ConfigError("chain: length must be >= 2");
  if (episode_len < 1) throw ConfigError("chain: episode_len must be >= 1");
  if (goal_state >= length) throw ConfigError("chain: goal_state out of range");
  if (noise_dims < 0) throw ConfigError("chain: noise_dims must be >= 0");
}

Tensor ChainEnv::render() {
  Tensor obs({static_cast<std::size_t>(obs_dim())});
  obs.data[static_cast<std::size_t>(pos_)] = 1.0;
  for (int i = 0; i < noise_dims_; ++i) {
    obs.data[static_cast<std::size_t>(length_ + i)] = rng_.normal();
  }
  return obs;
}

Tensor ChainEnv::reset() {
  pos_ = 0;
  step_count_ = 0;
  return render();
}

Transition ChainEnv::step(int action) {
  if (action < 0 || action >= 2) throw DimensionError("chain step: action index out of range");
  Transition t;
  t.obs = render();
  t.action = action;
  t.executed_action = action;
  if (pos_ != length_ - 1) {  // the last state absorbs
    if (action == kRight && pos_ < length_ - 1) ++pos_;
    if (action == kLeft && pos_ > 0) --pos_;
  }
  t.extrinsic_reward = (goal_state_ >= 0 && pos_ == goal_state_) ? 1.0 : 0.0;
  ++step_count_;
  t.done = step_count_ >= episode_len_;
  t.next_obs = render();
  return t;
}

Transition NoisyGrid::step(int action) {
  if (action < 0 || action >= 4) {
    throw DimensionError("grid step: action index out of range");
  }
  int executed = action;
  if (cfg_.sticky_prob > 0.0 && prev_executed_ >= 0) {
    if (rng_.uniform() < cfg_.sticky_prob) executed = prev_executed_;
  }
  int g = cfg_.grid_side;
  int row = pos_ / g, col = pos_ % g;
  switch (executed) {
    case kUp: row = row > 0 ? row - 1 : 0; break;
    case kDown: row = row < g - 1 ? row + 1 : g - 1; break;
    case kLeft: col = col > 0 ? col - 1 : 0; break;
    case kRight: col = col < g - 1 ? col + 1 : g - 1; break;
    default: break;
  }
  Transition t;
  t.obs = last_obs_;
  t.action = action;
  t.executed_action = executed;
  pos_ = row * g + col;
  t.extrinsic_reward = (cfg_.goal_cell >= 0 && pos_ == cfg_.goal_cell) ? 1.0 : 0.0;
  ++step_count_;
  t.done = step_count_ >= cfg_.episode_len;
  t.next_obs = render_observation(pos_, cfg_, rng_);
  prev_executed_ = executed;
  last_obs_ = t.next_obs;
  return t;
}

}  // namespace ibx

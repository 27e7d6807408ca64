#pragma once

#include <string>

#include "ibx/params.hpp"

namespace ibx {

inline constexpr int kCheckpointVersion = 1;

// Versioned container: 8-byte little-endian manifest length, JSON manifest
// (name, shape, byte offset per tensor), little-endian float64 payload.
// Round trips are bit-exact.
void checkpoint_save(const ParamSet& params, const std::string& path);
ParamSet checkpoint_load(const std::string& path);

}  // namespace ibx

#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace ibx {

// Verification suites: theorem1, theorem2, nce-bound, gradcheck, collapse.
// Each returns a machine-readable report with a top-level "pass" flag;
// unknown names raise UsageError.
nlohmann::json run_verify_suite(const std::string& name);
bool verify_passed(const nlohmann::json& report);

// paired collapse diagnostic shared by the verify suite and the acceptance
// run: identical data and budget, one arm with the shared encoder and no
// contrastive term, one arm with the default configuration
struct CollapseReport {
  double ablated_std = 0.0;
  double default_std = 0.0;
  std::size_t ablated_steps = 0;
  std::size_t default_steps = 0;
  bool ablated_collapsed = false;  // probe std < 1e-3
  bool default_healthy = false;    // probe std > 1e-2
};
CollapseReport run_collapse_diagnostic(std::uint64_t seed, std::size_t max_steps = 6000);

}  // namespace ibx

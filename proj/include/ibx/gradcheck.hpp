#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ibx/params.hpp"
#include "ibx/rng.hpp"

namespace ibx {

struct GradReport {
  struct Entry {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
  };
  std::vector<Entry> per_param;
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;

  bool passed(double tol) const { return max_rel_error < tol; }
};

using LossFn = std::function<double(const ParamSet&)>;
// returns gradients for the trainable subset; params absent from the result
// are treated as frozen and skipped by the check
using GradFn = std::function<ParamSet(const ParamSet&)>;

// Central finite differences per coordinate against the analytic gradient.
// Tensors larger than `dense_limit` entries are checked on a seeded random
// subsample of `subsample` coordinates. rel err = |a-n| / max(1e-8, |a|+|n|).
GradReport finite_difference_check(const LossFn& loss, const GradFn& analytic,
                                   const ParamSet& params, double eps, RngStream& rng,
                                   std::size_t dense_limit = 256, std::size_t subsample = 64);

}  // namespace ibx

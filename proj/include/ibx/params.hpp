#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "ibx/rng.hpp"
#include "ibx/tensor.hpp"

namespace ibx {

// Named tensors with a stable (insertion) order.
class ParamSet {
 public:
  void add(const std::string& name, Tensor t);
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::size_t total_scalars() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Adam with bias correction; per-tensor moment buffers keyed by name.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-7)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // applies one step to every param that has an entry in `grads`
  void step(ParamSet& params, const ParamSet& grads);

  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::unordered_map<std::string, std::pair<Tensor, Tensor>> moments_;
};

// weight [in, out] with He-style uniform fan-in limit sqrt(6/in); bias zeros
void add_linear(ParamSet& ps, const std::string& prefix, std::size_t in, std::size_t out,
                RngStream& rng);

}  // namespace ibx

#include "ibx/params.hpp"

#include <cmath>

#include "ibx/error.hpp"

namespace ibx {

void ParamSet::add(const std::string& name, Tensor t) {
  if (has(name)) throw ConfigError("param set: duplicate name " + name);
  index_[name] = names_.size();
  names_.push_back(name);
  values_.push_back(std::move(t));
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("param set: unknown name " + name);
  return values_[it->second];
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("param set: unknown name " + name);
  return values_[it->second];
}

std::size_t ParamSet::total_scalars() const {
  std::size_t n = 0;
  for (const Tensor& t : values_) n += t.numel();
  return n;
}

void AdamOptimizer::step(ParamSet& params, const ParamSet& grads) {
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const std::string& name : grads.names()) {
    Tensor& p = params.at(name);
    const Tensor& g = grads.at(name);
    if (!p.same_shape(g)) {
      throw DimensionError("adam: grad shape mismatch for " + name);
    }
    auto [it, inserted] = moments_.try_emplace(name, Tensor(p.shape), Tensor(p.shape));
    Tensor& m = it->second.first;
    Tensor& v = it->second.second;
    for (std::size_t i = 0; i < p.numel(); ++i) {
      double gi = g.data[i];
      m.data[i] = beta1_ * m.data[i] + (1.0 - beta1_) * gi;
      v.data[i] = beta2_ * v.data[i] + (1.0 - beta2_) * gi * gi;
      double mhat = m.data[i] / bc1;
      double vhat = v.data[i] / bc2;
      p.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void add_linear(ParamSet& ps, const std::string& prefix, std::size_t in, std::size_t out,
                RngStream& rng) {
  Tensor w({in, out});
  double limit = std::sqrt(6.0 / static_cast<double>(in));
  for (double& x : w.data) x = (2.0 * rng.uniform() - 1.0) * limit;
  ps.add(prefix + ".w", std::move(w));
  ps.add(prefix + ".b", Tensor({out}));
}

}  // namespace ibx

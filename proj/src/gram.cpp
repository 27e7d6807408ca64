#include "ibx/gram.hpp"

#include <cmath>

#include "ibx/error.hpp"

namespace ibx {

GramAccumulator::GramAccumulator(std::size_t dim, double ridge)
    : dim_(dim), ridge_(ridge), lambda_({dim, dim}), chol_({dim, dim}) {
  if (dim == 0) throw ConfigError("gram: dimension must be positive");
  if (!(ridge > 0.0)) throw ConfigError("gram: ridge must be > 0");
  double root = std::sqrt(ridge);
  for (std::size_t i = 0; i < dim; ++i) {
    lambda_.at(i, i) = ridge;
    chol_.at(i, i) = root;
  }
}

void GramAccumulator::update(const Tensor& eta) {
  if (eta.numel() != dim_) {
    throw DimensionError("gram update: feature dim " + std::to_string(eta.numel()) +
                         " != " + std::to_string(dim_));
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      lambda_.at(i, j) += eta.data[i] * eta.data[j];
    }
  }
  // Givens-style rank-1 Cholesky update
  std::vector<double> x = eta.data;
  for (std::size_t k = 0; k < dim_; ++k) {
    double lkk = chol_.at(k, k);
    double r = std::sqrt(lkk * lkk + x[k] * x[k]);
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw NumericError("gram update: factor lost positive definiteness");
    }
    double c = r / lkk;
    double s = x[k] / lkk;
    chol_.at(k, k) = r;
    for (std::size_t i = k + 1; i < dim_; ++i) {
      chol_.at(i, k) = (chol_.at(i, k) + s * x[i]) / c;
      x[i] = c * x[i] - s * chol_.at(i, k);
    }
  }
  ++count_;
}

double GramAccumulator::quad_inv(const Tensor& eta) const {
  if (eta.numel() != dim_) throw DimensionError("gram quad: feature dim mismatch");
  // forward substitution L w = eta, then quad = ||w||^2
  std::vector<double> w(dim_);
  double quad = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    double acc = eta.data[i];
    for (std::size_t j = 0; j < i; ++j) acc -= chol_.at(i, j) * w[j];
    double d = chol_.at(i, i);
    if (!(d > 0.0)) throw NumericError("gram quad: singular factor");
    w[i] = acc / d;
    quad += w[i] * w[i];
  }
  return quad;
}

Tensor GramAccumulator::solve(const Tensor& rhs) const {
  if (rhs.numel() != dim_) throw DimensionError("gram solve: rhs dim mismatch");
  std::vector<double> w(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    double acc = rhs.data[i];
    for (std::size_t j = 0; j < i; ++j) acc -= chol_.at(i, j) * w[j];
    w[i] = acc / chol_.at(i, i);
  }
  Tensor x({dim_});
  for (std::size_t ii = dim_; ii > 0; --ii) {
    std::size_t i = ii - 1;
    double acc = w[i];
    for (std::size_t j = i + 1; j < dim_; ++j) acc -= chol_.at(j, i) * x.data[j];
    x.data[i] = acc / chol_.at(i, i);
  }
  return x;
}

double ucb_bonus(const Tensor& eta, const GramAccumulator& acc, double beta) {
  return beta * std::sqrt(acc.quad_inv(eta));
}

double info_gain_linear(const Tensor& eta, const GramAccumulator& acc, double c) {
  if (c < 1.0) throw ConfigError("info gain: c must be >= 1");
  return 0.5 * c * std::log1p(acc.quad_inv(eta));
}

}  // namespace ibx

#pragma once

#include <cstddef>

#include "ibx/tensor.hpp"

namespace ibx {

// Ridge Gram matrix Lambda = sum eta eta^T + ridge*I with an incrementally
// maintained lower Cholesky factor; quadratic forms and solves go through the
// factor, never through an explicit inverse.
class GramAccumulator {
 public:
  GramAccumulator(std::size_t dim, double ridge);

  void update(const Tensor& eta);  // rank-1 add
  // eta^T Lambda^{-1} eta  (= ||L^{-1} eta||^2)
  double quad_inv(const Tensor& eta) const;
  // Lambda x = rhs
  Tensor solve(const Tensor& rhs) const;

  const Tensor& matrix() const { return lambda_; }
  const Tensor& chol_lower() const { return chol_; }
  std::size_t dim() const { return dim_; }
  double ridge() const { return ridge_; }
  std::size_t count() const { return count_; }

 private:
  std::size_t dim_;
  double ridge_;
  std::size_t count_ = 0;
  Tensor lambda_;  // [d,d]
  Tensor chol_;    // [d,d] lower
};

double ucb_bonus(const Tensor& eta, const GramAccumulator& acc, double beta);
// (c/2) * log(eta^T Lambda^{-1} eta + 1)
double info_gain_linear(const Tensor& eta, const GramAccumulator& acc, double c);

}  // namespace ibx

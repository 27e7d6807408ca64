#pragma once

#include <cmath>

#include "ibx/rng.hpp"
#include "ibx/tensor.hpp"

namespace ibx {

// std vectors produced by the model pass through softplus plus this floor,
// keeping log(sigma) bounded; the type enforces it for every instance.
inline constexpr double kStdFloor = 1e-3;
inline constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)

struct GaussianDiag {
  Tensor mean;
  Tensor std;

  GaussianDiag(Tensor mean_, Tensor std_) : mean(std::move(mean_)), std(std::move(std_)) {
    if (!mean.same_shape(std)) {
      throw DimensionError("GaussianDiag: mean shape " + shape_str(mean) +
                           " != std shape " + shape_str(std));
    }
    for (double s : std.data) {
      if (!(s >= kStdFloor - 1e-15)) {
        throw NumericError("GaussianDiag: std entry below floor");
      }
    }
  }

  std::size_t dim() const { return mean.numel(); }
};

inline double gaussian_log_density(const Tensor& x, const GaussianDiag& g) {
  if (!x.same_shape(g.mean)) {
    throw DimensionError("gaussian_log_density: x shape " + shape_str(x) +
                         " != mean shape " + shape_str(g.mean));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    double s = g.std.data[i];
    double d = x.data[i] - g.mean.data[i];
    acc += -0.5 * kLogTwoPi - std::log(s) - d * d / (2.0 * s * s);
  }
  return acc;
}

// KL( N(mean, diag(std^2)) || N(0, I) ) = 1/2 sum( mu^2 + s^2 - 1 - log s^2 )
inline double kl_to_standard_normal(const GaussianDiag& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.dim(); ++i) {
    double m = g.mean.data[i];
    double s = g.std.data[i];
    acc += 0.5 * (m * m + s * s - 1.0) - std::log(s);
  }
  return acc;
}

inline Tensor reparameterize(const GaussianDiag& g, const Tensor& eps) {
  if (!eps.same_shape(g.mean)) {
    throw DimensionError("reparameterize: eps shape " + shape_str(eps) +
                         " != mean shape " + shape_str(g.mean));
  }
  Tensor z = g.mean;
  for (std::size_t i = 0; i < z.numel(); ++i) z.data[i] += g.std.data[i] * eps.data[i];
  return z;
}

inline Tensor sample(const GaussianDiag& g, RngStream& rng) {
  Tensor eps(g.mean.shape);
  for (double& e : eps.data) e = rng.normal();
  return reparameterize(g, eps);
}

}  // namespace ibx

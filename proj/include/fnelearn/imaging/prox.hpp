#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace fnelearn {

// prox of sigma^{-1} r for the separable per-pixel regularisers r.

// r = (alpha/2) ||.||^2
inline Eigen::Vector2d prox_h1(const Eigen::Vector2d& z, double alpha, double sigma) {
  return z / (1.0 + alpha / sigma);
}

// r = alpha ||.||_1
inline Eigen::Vector2d prox_l1(const Eigen::Vector2d& z, double alpha, double sigma) {
  const double k = alpha / sigma;
  auto shrink = [k](double v) { return std::copysign(std::max(0.0, std::abs(v) - k), v); };
  return {shrink(z.x()), shrink(z.y())};
}

// r = alpha ||.||_2
inline Eigen::Vector2d prox_l2(const Eigen::Vector2d& z, double alpha, double sigma) {
  const double k = alpha / sigma;
  const double n = z.norm();
  if (n <= k) return Eigen::Vector2d::Zero();
  return (1.0 - k / n) * z;
}

enum class Regularizer { H1, TvAniso, TvIso };

inline Eigen::Vector2d prox_of(Regularizer r, const Eigen::Vector2d& z, double alpha, double sigma) {
  switch (r) {
    case Regularizer::H1: return prox_h1(z, alpha, sigma);
    case Regularizer::TvAniso: return prox_l1(z, alpha, sigma);
    case Regularizer::TvIso: return prox_l2(z, alpha, sigma);
  }
  return z;
}

}  // namespace fnelearn

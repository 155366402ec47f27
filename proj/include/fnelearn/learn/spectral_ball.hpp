#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "fnelearn/linalg.hpp"

namespace fnelearn {

// Frobenius-nearest matrix with spectral norm <= radius: clamp the singular
// values. Closed form for 2x2.
inline Eigen::Matrix2d project_spectral_ball2(const Eigen::Matrix2d& m, double radius) {
  auto s = linalg::svd2(m);
  if (s.s1 <= radius) return m;
  s.s1 = radius;
  s.s2 = std::copysign(std::min(std::abs(s.s2), radius), s.s2);
  return linalg::compose(s);
}

inline Eigen::MatrixXd project_spectral_ball(const Eigen::MatrixXd& m, double radius) {
  if (m.rows() == 2 && m.cols() == 2) return project_spectral_ball2(m, radius);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= radius) return m;
  return svd.matrixU() * sv.cwiseMin(radius).asDiagonal() * svd.matrixV().transpose();
}

}  // namespace fnelearn

#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace fnelearn::linalg {

// Closed-form SVD of a real 2x2 matrix, M = R(phi) diag(s1, s2) R(theta)
// with s1 >= |s2| (s2 carries the sign of det M).
struct Svd2 {
  double s1 = 0.0;
  double s2 = 0.0;
  double phi = 0.0;
  double theta = 0.0;
};

inline Svd2 svd2(const Eigen::Matrix2d& m) {
  const double e = 0.5 * (m(0, 0) + m(1, 1));
  const double f = 0.5 * (m(0, 0) - m(1, 1));
  const double g = 0.5 * (m(1, 0) + m(0, 1));
  const double h = 0.5 * (m(1, 0) - m(0, 1));
  const double q = std::hypot(e, h);
  const double r = std::hypot(f, g);
  const double a1 = std::atan2(g, f);
  const double a2 = std::atan2(h, e);
  return {q + r, q - r, 0.5 * (a2 + a1), 0.5 * (a2 - a1)};
}

inline Eigen::Matrix2d rotation(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

inline Eigen::Matrix2d compose(const Svd2& s) {
  return rotation(s.phi) * Eigen::Vector2d(s.s1, s.s2).asDiagonal() * rotation(s.theta);
}

// Largest singular value of a 2x2 matrix.
inline double spectral_norm2(const Eigen::Matrix2d& m) {
  const double e = 0.5 * (m(0, 0) + m(1, 1));
  const double f = 0.5 * (m(0, 0) - m(1, 1));
  const double g = 0.5 * (m(1, 0) + m(0, 1));
  const double h = 0.5 * (m(1, 0) - m(0, 1));
  return std::hypot(e, h) + std::hypot(f, g);
}

inline double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.rows() == 2 && m.cols() == 2) return spectral_norm2(m);
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace fnelearn::linalg

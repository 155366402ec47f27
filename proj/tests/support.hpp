#pragma once

#include <Eigen/Core>

#include <random>

namespace testing_support {

inline Eigen::MatrixXd uniform_points(int d, int m, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd p(d, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < d; ++i) p(i, j) = u(rng);
  return p;
}

inline Eigen::MatrixXd gaussian(int r, int c, std::mt19937_64& rng, double s = 1.0) {
  std::normal_distribution<double> g(0.0, s);
  Eigen::MatrixXd out(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) out(i, j) = g(rng);
  return out;
}

// Number of strictly convex hull vertices by gift wrapping.
inline int gift_wrap_count(const Eigen::MatrixXd& p) {
  const int m = static_cast<int>(p.cols());
  int start = 0;
  for (int i = 1; i < m; ++i)
    if (p(0, i) < p(0, start) || (p(0, i) == p(0, start) && p(1, i) < p(1, start))) start = i;
  int count = 0, cur = start;
  do {
    ++count;
    int next = (cur + 1) % m;
    for (int k = 0; k < m; ++k) {
      if (k == cur) continue;
      const double cr = (p(0, next) - p(0, cur)) * (p(1, k) - p(1, cur)) -
                        (p(1, next) - p(1, cur)) * (p(0, k) - p(0, cur));
      const double dn = (p.col(next) - p.col(cur)).squaredNorm();
      const double dk = (p.col(k) - p.col(cur)).squaredNorm();
      // Clockwise of the current candidate, or collinear but farther.
      if (cr < 0.0 || (cr == 0.0 && dk > dn)) next = k;
    }
    cur = next;
  } while (cur != start && count <= m);
  return count;
}

}  // namespace testing_support

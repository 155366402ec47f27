#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace fnelearn::geom {

using Vec2 = Eigen::Vector2d;

// Twice the signed area of (a, b, c); positive for counter-clockwise.
inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// Orientation with a relative tie band: returns +1, -1 or 0.
inline int orient_sign(const Vec2& a, const Vec2& b, const Vec2& c,
                       double rel_tol = 1e-12) {
  const double o = orient(a, b, c);
  const double scale = (b - a).norm() * (c - a).norm();
  if (std::abs(o) <= rel_tol * scale) return 0;
  return o > 0 ? 1 : -1;
}

// Positive when d lies strictly inside the circumcircle of the
// counter-clockwise triangle (a, b, c). `permanent` receives the magnitude
// bound used to judge ties.
inline long double incircle(const Vec2& a, const Vec2& b, const Vec2& c,
                            const Vec2& d, long double* permanent = nullptr) {
  const long double adx = a.x() - d.x(), ady = a.y() - d.y();
  const long double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const long double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const long double alift = adx * adx + ady * ady;
  const long double blift = bdx * bdx + bdy * bdy;
  const long double clift = cdx * cdx + cdy * cdy;
  const long double bc = bdx * cdy - cdx * bdy;
  const long double ca = cdx * ady - adx * cdy;
  const long double ab = adx * bdy - bdx * ady;
  if (permanent != nullptr) {
    *permanent = alift * (std::fabs(bdx * cdy) + std::fabs(cdx * bdy)) +
                 blift * (std::fabs(cdx * ady) + std::fabs(adx * cdy)) +
                 clift * (std::fabs(adx * bdy) + std::fabs(bdx * ady));
  }
  return alift * bc + blift * ca + clift * ab;
}

// Euclidean projection of p onto the segment [a, b].
inline Vec2 project_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return a;
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + s * ab;
}

}  // namespace fnelearn::geom

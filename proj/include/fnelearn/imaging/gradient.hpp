#pragma once

#include "fnelearn/imaging/image.hpp"

namespace fnelearn {

// Forward differences, Neumann boundary (last column / row difference is 0).
inline GradientField gradient(const Image& u) {
  const auto p = u.rows(), q = u.cols();
  GradientField g(p, q);
  if (q > 1) g.dx.leftCols(q - 1) = u.pixels.rightCols(q - 1) - u.pixels.leftCols(q - 1);
  if (p > 1) g.dy.topRows(p - 1) = u.pixels.bottomRows(p - 1) - u.pixels.topRows(p - 1);
  return g;
}

// D^* = -div, the exact adjoint of gradient().
inline Image gradient_adjoint(const GradientField& v, Eigen::Index p, Eigen::Index q) {
  if (v.rows() != p || v.cols() != q) throw ShapeMismatch("gradient adjoint: field shape mismatch");
  Image out(p, q);
  auto& o = out.pixels;
  if (q > 1) {
    o.leftCols(q - 1) -= v.dx.leftCols(q - 1);
    o.rightCols(q - 1) += v.dx.leftCols(q - 1);
  }
  if (p > 1) {
    o.topRows(p - 1) -= v.dy.topRows(p - 1);
    o.bottomRows(p - 1) += v.dy.topRows(p - 1);
  }
  return out;
}

inline Image gradient_adjoint(const GradientField& v) { return gradient_adjoint(v, v.rows(), v.cols()); }

// Known bound ||D||^2 <= 8 for this scheme.
inline constexpr double kGradientNormSquaredBound = 8.0;

}  // namespace fnelearn

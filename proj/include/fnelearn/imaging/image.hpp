#pragma once

#include <Eigen/Core>

#include <string>

#include "fnelearn/errors.hpp"

namespace fnelearn {

// Grayscale image, p rows by q columns, nominal range [0, 255].
struct Image {
  Eigen::MatrixXd pixels;

  Image() = default;
  explicit Image(Eigen::MatrixXd px) : pixels(std::move(px)) {
    if (!pixels.allFinite()) throw DegenerateInput("image: non-finite pixel");
  }
  Image(Eigen::Index rows, Eigen::Index cols, double fill = 0.0) : pixels(Eigen::MatrixXd::Constant(rows, cols, fill)) {}

  Eigen::Index rows() const { return pixels.rows(); }
  Eigen::Index cols() const { return pixels.cols(); }
  Eigen::Index size() const { return pixels.size(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return pixels(i, j); }
  double& operator()(Eigen::Index i, Eigen::Index j) { return pixels(i, j); }
};

// Per-pixel 2-vectors: dx is the horizontal (column) difference, dy the
// vertical (row) one.
struct GradientField {
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;

  GradientField() = default;
  GradientField(Eigen::Index rows, Eigen::Index cols)
      : dx(Eigen::MatrixXd::Zero(rows, cols)), dy(Eigen::MatrixXd::Zero(rows, cols)) {}
  GradientField(Eigen::MatrixXd h, Eigen::MatrixXd v) : dx(std::move(h)), dy(std::move(v)) {
    if (dx.rows() != dy.rows() || dx.cols() != dy.cols()) throw ShapeMismatch("gradient field: component shapes differ");
  }

  Eigen::Index rows() const { return dx.rows(); }
  Eigen::Index cols() const { return dx.cols(); }
  double dot(const GradientField& o) const { return (dx.array() * o.dx.array()).sum() + (dy.array() * o.dy.array()).sum(); }
  double squared_norm() const { return dx.squaredNorm() + dy.squaredNorm(); }
};

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch(std::string(what) + ": image shapes differ");
}

}  // namespace fnelearn

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>

#include "fnelearn/imaging/image.hpp"

namespace fnelearn {

inline constexpr double kPeak = 255.0;

inline double mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  return (a.pixels - b.pixels).squaredNorm() / static_cast<double>(a.size());
}

// +infinity for identical images.
inline double psnr(const Image& a, const Image& b) {
  const double e = mse(a, b);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(kPeak * kPeak / e);
}

struct SsimParams {
  int window = 8;
  double k1 = 0.01;
  double k2 = 0.03;
  double range = kPeak;
};

// Mean SSIM over all fully contained window positions (stride 1, uniform
// weights, population moments).
inline double ssim(const Image& a, const Image& b, const SsimParams& prm = {}) {
  require_same_shape(a, b, "ssim");
  const auto p = a.rows(), q = a.cols();
  const int w = prm.window;
  if (p < w || q < w) throw ShapeMismatch("ssim: image smaller than the window");
  const double c1 = (prm.k1 * prm.range) * (prm.k1 * prm.range);
  const double c2 = (prm.k2 * prm.range) * (prm.k2 * prm.range);

  // Summed-area tables with a zero border.
  auto table = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p + 1, q + 1);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < q; ++j) s(i + 1, j + 1) = m(i, j) + s(i, j + 1) + s(i + 1, j) - s(i, j);
    return s;
  };
  const Eigen::MatrixXd& x = a.pixels;
  const Eigen::MatrixXd& y = b.pixels;
  const Eigen::MatrixXd sx = table(x), sy = table(y);
  const Eigen::MatrixXd sxx = table(x.cwiseProduct(x)), syy = table(y.cwiseProduct(y)), sxy = table(x.cwiseProduct(y));
  auto box = [w](const Eigen::MatrixXd& s, Eigen::Index i, Eigen::Index j) {
    return s(i + w, j + w) - s(i, j + w) - s(i + w, j) + s(i, j);
  };
  const double n = static_cast<double>(w) * w;
  double total = 0.0;
  for (Eigen::Index i = 0; i + w <= p; ++i) {
    for (Eigen::Index j = 0; j + w <= q; ++j) {
      const double mx = box(sx, i, j) / n, my = box(sy, i, j) / n;
      const double vx = std::max(0.0, box(sxx, i, j) / n - mx * mx);
      const double vy = std::max(0.0, box(syy, i, j) / n - my * my);
      const double cxy = box(sxy, i, j) / n - mx * my;
      total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
  }
  return total / static_cast<double>((p - w + 1) * (q - w + 1));
}

}  // namespace fnelearn

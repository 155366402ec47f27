#pragma once

#include <cstdint>
#include <random>

#include "fnelearn/imaging/image.hpp"

namespace fnelearn {

// u + N(0, eta^2) per pixel, no clipping.
inline Image add_gaussian_noise(const Image& u, double eta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, eta);
  Image out = u;
  for (Eigen::Index j = 0; j < u.cols(); ++j)
    for (Eigen::Index i = 0; i < u.rows(); ++i) out(i, j) += g(rng);
  return out;
}

}  // namespace fnelearn

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/imaging/gradient.hpp"
#include "fnelearn/imaging/image.hpp"
#include "fnelearn/imaging/noise.hpp"
#include "fnelearn/learn/training_set.hpp"

namespace fnelearn {

enum class NoiseMode { Gradient, Image };

struct TrainingBuildConfig {
  double eta_tilde = 10.0;
  int n_clusters = 250;
  std::uint64_t seed = 0;
  int kmeans_iters = 100;
  // Gradient: noise added to clean gradients; Image: noise added to the
  // image, then differenced.
  NoiseMode noise_mode = NoiseMode::Gradient;
};

struct KMeansResult {
  Eigen::MatrixXd centroids;     // d x k
  std::vector<int> assignment;   // per point
};

// Lloyd iterations from a k-means++ start. Empty clusters keep their centroid.
inline KMeansResult kmeans(const Eigen::MatrixXd& pts, int k, int iters, std::mt19937_64& rng) {
  const auto n = pts.cols();
  if (n == 0) throw EmptyInput("kmeans: no points");
  if (k < 1) throw InvalidConfig("kmeans: need at least one cluster");
  if (k > n) throw InvalidConfig("kmeans: more clusters than points");
  KMeansResult r;
  r.centroids.resize(pts.rows(), k);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  r.centroids.col(0) = pts.col(pick(rng));
  Eigen::VectorXd dist = (pts.colwise() - r.centroids.col(0)).colwise().squaredNorm().transpose();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = dist.sum();
    Eigen::Index chosen = n - 1;
    if (total > 0.0) {
      double target = u(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= dist(i);
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    r.centroids.col(c) = pts.col(chosen);
    dist = dist.cwiseMin((pts.colwise() - r.centroids.col(c)).colwise().squaredNorm().transpose());
  }

  r.assignment.assign(static_cast<std::size_t>(n), 0);
  Eigen::MatrixXd sums(pts.rows(), k);
  std::vector<long> counts(static_cast<std::size_t>(k));
  for (int it = 0; it < iters; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dd = (pts.col(i) - r.centroids.col(c)).squaredNorm();
        if (dd < bd) {
          bd = dd;
          best = c;
        }
      }
      if (r.assignment[static_cast<std::size_t>(i)] != best || it == 0) changed = true;
      r.assignment[static_cast<std::size_t>(i)] = best;
    }
    sums.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = r.assignment[static_cast<std::size_t>(i)];
      sums.col(c) += pts.col(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) r.centroids.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    if (!changed) break;
  }
  return r;
}

// Noisy/clean gradient pairs clustered on the noisy coordinate, then
// reflected through both axes: 4 * n_clusters pairs, cluster-major.
inline TrainingSet build_training_set(const std::vector<Image>& images, const TrainingBuildConfig& cfg) {
  if (images.empty()) throw EmptyInput("build_training_set: no images");
  if (cfg.n_clusters < 1) throw InvalidConfig("build_training_set: n_clusters must be >= 1");
  if (!(cfg.eta_tilde >= 0.0)) throw InvalidConfig("build_training_set: eta_tilde must be >= 0");
  Eigen::Index total = 0;
  for (const auto& im : images) total += im.size();
  Eigen::MatrixXd clean(2, total), noisy(2, total);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> g(0.0, cfg.eta_tilde);
  Eigen::Index k = 0;
  for (const auto& im : images) {
    const GradientField cg = gradient(im);
    GradientField ng;
    if (cfg.noise_mode == NoiseMode::Image) ng = gradient(add_gaussian_noise(im, cfg.eta_tilde, rng()));
    for (Eigen::Index j = 0; j < im.cols(); ++j) {
      for (Eigen::Index i = 0; i < im.rows(); ++i, ++k) {
        clean.col(k) << cg.dx(i, j), cg.dy(i, j);
        if (cfg.noise_mode == NoiseMode::Gradient) {
          const double a = g(rng), b = g(rng);
          noisy.col(k) << cg.dx(i, j) + a, cg.dy(i, j) + b;
        } else {
          noisy.col(k) << ng.dx(i, j), ng.dy(i, j);
        }
      }
    }
  }
  const auto km = kmeans(noisy, cfg.n_clusters, cfg.kmeans_iters, rng);
  Eigen::MatrixXd zc = Eigen::MatrixXd::Zero(2, cfg.n_clusters);
  std::vector<long> counts(static_cast<std::size_t>(cfg.n_clusters), 0);
  for (Eigen::Index i = 0; i < total; ++i) {
    const int c = km.assignment[static_cast<std::size_t>(i)];
    zc.col(c) += clean.col(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  int used = 0;
  for (int c = 0; c < cfg.n_clusters; ++c) used += counts[static_cast<std::size_t>(c)] > 0;
  Eigen::MatrixXd x(2, 4 * used), z(2, 4 * used);
  Eigen::Index col = 0;
  for (int c = 0; c < cfg.n_clusters; ++c) {
    const auto cnt = counts[static_cast<std::size_t>(c)];
    if (cnt == 0) continue;
    const Eigen::Vector2d xm = km.centroids.col(c);
    const Eigen::Vector2d zm = zc.col(c) / static_cast<double>(cnt);
    for (int s = 0; s < 4; ++s) {
      const Eigen::Vector2d sg((s & 1) ? -1.0 : 1.0, (s & 2) ? -1.0 : 1.0);
      x.col(col) = sg.cwiseProduct(xm);
      z.col(col) = sg.cwiseProduct(zm);
      ++col;
    }
  }
  return TrainingSet(x, z);
}

}  // namespace fnelearn

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/learn/training_set.hpp"

namespace fnelearn {

inline constexpr Eigen::Index kSololipMaxPairs = 200;

struct SololipConfig {
  double rho0 = 1.0;
  int max_iters = 200000;
  double tol_violation = 1e-8;
  double tol_dual = 1e-9;
  double epsilon_margin = 0.0;
};

struct SololipResult {
  Eigen::MatrixXd values;  // d x n
  double objective = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Largest  ||y_i - y_j|| - r_ij  over all pairs (negative when strictly feasible).
inline double pairwise_violation(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, double radius_scale = 1.0) {
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < y.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < y.cols(); ++j) {
      worst = std::max(worst, (y.col(i) - y.col(j)).norm() - radius_scale * (x.col(i) - x.col(j)).norm());
    }
  }
  return worst;
}

// min (1/n) sum ||y_i - ybar_i||^2  s.t.  ||y_i - y_j|| <= (1 - eps) ||xbar_i - xbar_j||  for all i < j.
// Consensus ADMM: every pair owns a copy (a, b) of (y_i, y_j) projected onto
// its constraint set in closed form (keep the midpoint, shrink the difference).
inline SololipResult solve_sololip(const TrainingSet& ts, const SololipConfig& cfg = {}) {
  const Eigen::Index n = ts.size();
  const int d = ts.dim();
  if (n > kSololipMaxPairs) {
    throw ScaleExceeded("sololip: n = " + std::to_string(n) + " exceeds " + std::to_string(kSololipMaxPairs));
  }
  if (!(cfg.rho0 > 0.0)) throw InvalidConfig("sololip: rho0 must be positive");
  const Eigen::MatrixXd ybar = ts.reflected_targets();
  const Eigen::MatrixXd& x = ts.inputs();
  const double scale = 1.0 - cfg.epsilon_margin;
  const double w = 2.0 / static_cast<double>(n);

  SololipResult res;
  res.values = ybar;
  if (n < 2) {
    res.converged = true;
    return res;
  }

  struct Pair {
    Eigen::Index i, j;
    double r;
  };
  std::vector<Pair> pairs;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) pairs.push_back({i, j, scale * (x.col(i) - x.col(j)).norm()});
  }
  const auto np = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd za(d, np), zb(d, np), la = Eigen::MatrixXd::Zero(d, np), lb = Eigen::MatrixXd::Zero(d, np);
  Eigen::MatrixXd y = ybar;
  for (Eigen::Index p = 0; p < np; ++p) {
    za.col(p) = y.col(pairs[p].i);
    zb.col(p) = y.col(pairs[p].j);
  }
  double rho = cfg.rho0;
  Eigen::MatrixXd acc(d, n);
  Eigen::VectorXd a(d), b(d), mid(d), diff(d);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    // y-step: diagonal system, every node sits in n - 1 pairs.
    acc = w * ybar;
    for (Eigen::Index p = 0; p < np; ++p) {
      acc.col(pairs[p].i) += rho * (za.col(p) - la.col(p));
      acc.col(pairs[p].j) += rho * (zb.col(p) - lb.col(p));
    }
    y = acc / (w + rho * static_cast<double>(n - 1));

    double prim = 0.0, dual = 0.0;
    for (Eigen::Index p = 0; p < np; ++p) {
      const auto& pr = pairs[p];
      a = y.col(pr.i) + la.col(p);
      b = y.col(pr.j) + lb.col(p);
      mid = 0.5 * (a + b);
      diff = a - b;
      const double len = diff.norm();
      if (len > pr.r) diff *= pr.r / len;
      a = mid + 0.5 * diff;
      b = mid - 0.5 * diff;
      dual = std::max(dual, std::max((a - za.col(p)).norm(), (b - zb.col(p)).norm()));
      za.col(p) = a;
      zb.col(p) = b;
      la.col(p) += y.col(pr.i) - a;
      lb.col(p) += y.col(pr.j) - b;
      prim = std::max(prim, std::max((y.col(pr.i) - a).norm(), (y.col(pr.j) - b).norm()));
    }
    dual *= rho;
    res.iterations = it;

    if (prim <= 0.5 * cfg.tol_violation && dual <= cfg.tol_dual) {
      const double viol = pairwise_violation(y, x, scale);
      if (viol <= cfg.tol_violation) {
        res.converged = true;
        break;
      }
    }
    // Residual balancing; duals are scaled so the unscaled multiplier stays put.
    if (it % 10 == 0) {
      double f = 1.0;
      if (prim > 10.0 * dual) f = 2.0;
      else if (dual > 10.0 * prim) f = 0.5;
      if (f != 1.0) {
        rho *= f;
        la /= f;
        lb /= f;
      }
    }
  }
  res.values = y;
  res.objective = (y - ybar).squaredNorm() / static_cast<double>(n);
  res.max_violation = std::max(0.0, pairwise_violation(y, x, scale));
  return res;
}

}  // namespace fnelearn

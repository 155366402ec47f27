#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "fnelearn/errors.hpp"

namespace fnelearn {

// A finite set of distinct points in R^d, stored column-wise (d x m), that
// spans R^d affinely.
class NodeSet {
 public:
  NodeSet() = default;

  explicit NodeSet(Eigen::MatrixXd points) : points_(std::move(points)) {
    validate();
  }

  int dim() const { return static_cast<int>(points_.rows()); }
  Eigen::Index size() const { return points_.cols(); }

  const Eigen::MatrixXd& points() const { return points_; }
  auto point(Eigen::Index i) const { return points_.col(i); }

  // Same nodes followed by `extra` (d x k). The result is re-validated.
  NodeSet appended(const Eigen::MatrixXd& extra) const {
    Eigen::MatrixXd all(points_.rows(), points_.cols() + extra.cols());
    all << points_, extra;
    return NodeSet(std::move(all));
  }

  bool operator==(const NodeSet& other) const {
    return points_.rows() == other.points_.rows() &&
           points_.cols() == other.points_.cols() && points_ == other.points_;
  }

 private:
  void validate() const {
    const auto d = points_.rows();
    const auto m = points_.cols();
    if (d < 1) throw DegenerateInput("node set: dimension must be positive");
    if (m < d + 1) {
      throw DegenerateInput("node set: need at least d+1 = " +
                            std::to_string(d + 1) + " points, got " +
                            std::to_string(m));
    }
    if (!points_.allFinite()) throw DegenerateInput("node set: non-finite coordinate");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto lex_less = [&](Eigen::Index a, Eigen::Index b) {
      for (Eigen::Index k = 0; k < d; ++k) {
        if (points_(k, a) != points_(k, b)) return points_(k, a) < points_(k, b);
      }
      return false;
    };
    std::sort(order.begin(), order.end(), lex_less);
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (points_.col(order[i]) == points_.col(order[i - 1])) {
        throw DegenerateInput("node set: duplicate points " +
                              std::to_string(order[i - 1]) + " and " +
                              std::to_string(order[i]));
      }
    }

    const Eigen::VectorXd centroid = points_.rowwise().mean();
    const Eigen::MatrixXd centered = points_.colwise() - centroid;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0 || s(d - 1) <= 1e-12 * s(0)) {
      throw DegenerateInput("node set: points lie on a hyperplane");
    }
  }

  Eigen::MatrixXd points_;
};

}  // namespace fnelearn

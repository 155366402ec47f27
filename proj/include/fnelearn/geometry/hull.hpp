#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/geometry/node_set.hpp"
#include "fnelearn/geometry/predicates.hpp"

namespace fnelearn {

// Convex hull of a planar point set as a counter-clockwise polygon of its
// extreme points (collinear boundary points dropped). Built once by Andrew's
// monotone chain; projection queries are O(hull size).
class ConvexHull2 {
 public:
  using Vec2 = geom::Vec2;

  ConvexHull2() = default;

  explicit ConvexHull2(const Eigen::MatrixXd& points) {
    if (points.rows() != 2) throw UnsupportedDimension("convex hull: only d = 2 is supported");
    const auto m = points.cols();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      if (points(0, a) != points(0, b)) return points(0, a) < points(0, b);
      return points(1, a) < points(1, b);
    });

    std::vector<Eigen::Index> chain(2 * idx.size());
    std::size_t k = 0;
    auto pt = [&](Eigen::Index i) { return Vec2(points(0, i), points(1, i)); };
    for (auto i : idx) {
      while (k >= 2 && geom::orient(pt(chain[k - 2]), pt(chain[k - 1]), pt(i)) <= 0.0) --k;
      chain[k++] = i;
    }
    const std::size_t lower = k + 1;
    for (auto it = idx.rbegin() + 1; it != idx.rend(); ++it) {
      while (k >= lower && geom::orient(pt(chain[k - 2]), pt(chain[k - 1]), pt(*it)) <= 0.0) --k;
      chain[k++] = *it;
    }
    chain.resize(k - 1);
    if (chain.size() < 3) throw DegenerateInput("convex hull: points are collinear");

    indices_.assign(chain.begin(), chain.end());
    vertices_.reserve(chain.size());
    for (auto i : chain) vertices_.push_back(pt(i));
  }

  explicit ConvexHull2(const NodeSet& nodes) : ConvexHull2(nodes.points()) {}

  const std::vector<Vec2>& vertices() const { return vertices_; }
  // Node indices of the hull vertices, counter-clockwise.
  const std::vector<Eigen::Index>& indices() const { return indices_; }

  double area() const {
    double twice = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const auto& a = vertices_[i];
      const auto& b = vertices_[(i + 1) % vertices_.size()];
      twice += a.x() * b.y() - a.y() * b.x();
    }
    return 0.5 * twice;
  }

  // Exact test against every supporting line; boundary points count as inside.
  bool contains(const Vec2& p) const {
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      if (geom::orient(vertices_[i], vertices_[(i + 1) % vertices_.size()], p) < 0.0) {
        return false;
      }
    }
    return true;
  }

  Vec2 project(const Vec2& p) const {
    if (contains(p)) return p;
    Vec2 best = vertices_.front();
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const Vec2 q = geom::project_segment(p, vertices_[i], vertices_[(i + 1) % vertices_.size()]);
      const double d2 = (q - p).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = q;
      }
    }
    return best;
  }

 private:
  std::vector<Vec2> vertices_;
  std::vector<Eigen::Index> indices_;
};

// Nearest point of conv(nodes) to x (d = 2).
inline Eigen::VectorXd project_hull(const NodeSet& nodes, const Eigen::VectorXd& x) {
  if (nodes.dim() != 2 || x.size() != 2) {
    throw UnsupportedDimension("project_hull: only d = 2 is supported");
  }
  const ConvexHull2 hull(nodes);
  return hull.project(geom::Vec2(x(0), x(1)));
}

}  // namespace fnelearn

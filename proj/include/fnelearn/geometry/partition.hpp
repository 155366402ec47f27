#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/geometry/hull.hpp"
#include "fnelearn/geometry/node_set.hpp"

namespace fnelearn {

// Vertex indices of one simplex, d+1 entries.
using Simplex = std::vector<int>;

inline constexpr double kContainmentTol = 1e-9;
inline constexpr double kStrictContainmentTol = 1e-12;

struct BarycentricLocation {
  int simplex_index = -1;
  Eigen::VectorXd weights;  // aligned with the simplex's vertex list
};

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Bucket grid over a 2-D bounding box with cell boundaries at node-coordinate
// quantiles, so crowded regions get small cells. Each cell lists, in
// increasing order, the simplices whose bounding box overlaps it.
class BucketGrid {
 public:
  BucketGrid() = default;

  // xs, ys: interior breakpoints per axis, sorted ascending.
  BucketGrid(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
    nx_ = static_cast<int>(xs_.size()) + 1;
    ny_ = static_cast<int>(ys_.size()) + 1;
    cells_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
  }

  // Breakpoints splitting v into about `parts` equally populated slabs.
  static std::vector<double> quantile_breaks(std::vector<double> v, int parts) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (int k = 1; k < parts; ++k) {
      const double b = v[static_cast<std::size_t>(k) * v.size() / static_cast<std::size_t>(parts)];
      if (out.empty() || b > out.back()) out.push_back(b);
    }
    return out;
  }

  bool empty() const { return cells_.empty(); }

  void insert(int id, const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) {
    const auto [i0, j0] = cell_of(lo);
    const auto [i1, j1] = cell_of(hi);
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) cells_[index(i, j)].push_back(id);
    }
  }

  const std::vector<int>& at(const Eigen::Vector2d& p) const {
    const auto [i, j] = cell_of(p);
    return cells_[index(i, j)];
  }

  // Calls f(id) for every id stored in a cell overlapping [lo, hi]; ids may
  // repeat across cells.
  template <class F>
  void for_each_in(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, F&& f) const {
    const auto [i0, j0] = cell_of(lo);
    const auto [i1, j1] = cell_of(hi);
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) {
        for (int id : cells_[index(i, j)]) f(id);
      }
    }
  }

 private:
  // Slab index = number of breakpoints strictly below v; monotone in v, so
  // lo <= p <= hi puts p's cell inside the box's cell range.
  static int slab(const std::vector<double>& b, double v) {
    return static_cast<int>(std::lower_bound(b.begin(), b.end(), v) - b.begin());
  }
  std::pair<int, int> cell_of(const Eigen::Vector2d& p) const { return {slab(xs_, p.x()), slab(ys_, p.y())}; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(ny_) + static_cast<std::size_t>(j);
  }

  std::vector<double> xs_, ys_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::vector<int>> cells_;
};

}  // namespace detail

// A family of simplices over a node set. Construction only checks index
// ranges; geometric validity (P1)-(P3) is reported by validate_partition().
// Immutable after construction, so concurrent queries are safe.
class SimplicialPartition {
 public:
  SimplicialPartition() = default;

  SimplicialPartition(NodeSet nodes, std::vector<Simplex> simplices)
      : nodes_(std::move(nodes)), simplices_(std::move(simplices)) {
    const int d = nodes_.dim();
    const auto m = nodes_.size();
    for (std::size_t t = 0; t < simplices_.size(); ++t) {
      const auto& s = simplices_[t];
      if (static_cast<int>(s.size()) != d + 1) {
        throw DegenerateInput("partition: simplex " + std::to_string(t) + " has " +
                              std::to_string(s.size()) + " vertices, expected " +
                              std::to_string(d + 1));
      }
      for (int v : s) {
        if (v < 0 || v >= m) {
          throw IndexOutOfRange("partition: simplex " + std::to_string(t) +
                                " references node " + std::to_string(v));
        }
      }
    }
    build_caches();
  }

  const NodeSet& nodes() const { return nodes_; }
  int dim() const { return nodes_.dim(); }
  std::span<const Simplex> simplices() const { return simplices_; }
  const Simplex& simplex(std::size_t t) const { return simplices_.at(t); }
  std::size_t size() const { return simplices_.size(); }

  // A_t = [x_{i1} - x_{i0} | ... | x_{id} - x_{i0}].
  Eigen::MatrixXd edge_matrix(std::size_t t) const {
    const auto& s = simplices_.at(t);
    const int d = dim();
    Eigen::MatrixXd a(d, d);
    for (int j = 1; j <= d; ++j) a.col(j - 1) = nodes_.point(s[j]) - nodes_.point(s[0]);
    return a;
  }

  // Cached A_t^{-1}; only meaningful when is_nondegenerate(t).
  const Eigen::MatrixXd& inverse_edge_matrix(std::size_t t) const { return inv_edge_.at(t); }
  bool is_nondegenerate(std::size_t t) const { return nondegenerate_.at(t) != 0; }
  double measure(std::size_t t) const { return measure_.at(t); }
  double determinant(std::size_t t) const { return det_.at(t); }
  double longest_edge(std::size_t t) const { return longest_edge_.at(t); }

  double total_measure() const {
    double s = 0.0;
    for (double v : measure_) s += v;
    return s;
  }

  // Only available for d = 2.
  const ConvexHull2& hull() const {
    if (!hull_) throw UnsupportedDimension("partition hull: only d = 2 is supported");
    return *hull_;
  }

  Eigen::VectorXd centroid(std::size_t t) const {
    const auto& s = simplices_.at(t);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dim());
    for (int v : s) c += nodes_.point(v);
    return c / static_cast<double>(s.size());
  }

  // Barycentric weights of x with respect to simplex t (may be negative).
  Eigen::VectorXd barycentric(std::size_t t, const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const auto& s = simplices_.at(t);
    const int d = dim();
    Eigen::VectorXd w(d + 1);
    w.tail(d) = inv_edge_[t] * (x - nodes_.point(s[0]));
    w(0) = 1.0 - w.tail(d).sum();
    return w;
  }

  // Lowest-index simplex containing x. Throws OutsideHull when none does
  // within kContainmentTol.
  BarycentricLocation locate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim()) throw ShapeMismatch("locate: point dimension mismatch");
    auto scan = [&](auto&& candidates) -> BarycentricLocation {
      int loose = -1;
      Eigen::VectorXd loose_w;
      for (int t : candidates) {
        if (!nondegenerate_[static_cast<std::size_t>(t)]) continue;
        Eigen::VectorXd w = barycentric(static_cast<std::size_t>(t), x);
        const double lo = w.minCoeff();
        if (lo >= -kStrictContainmentTol) return {t, std::move(w)};
        if (loose < 0 && lo >= -kContainmentTol) {
          loose = t;
          loose_w = std::move(w);
        }
      }
      if (loose >= 0) {
        loose_w = loose_w.cwiseMax(0.0);
        loose_w /= loose_w.sum();
        return {loose, std::move(loose_w)};
      }
      throw OutsideHull("locate: point is not inside any simplex");
    };
    if (!grid_.empty()) return scan(grid_.at(Eigen::Vector2d(x(0), x(1))));
    std::vector<int> all(simplices_.size());
    std::iota(all.begin(), all.end(), 0);
    return scan(all);
  }

  // Candidate simplices (increasing index) whose bounding box may contain
  // the 2-D point p. Empty grid (d != 2) returns nullptr.
  const std::vector<int>* candidates(const Eigen::Vector2d& p) const {
    if (grid_.empty()) return nullptr;
    return &grid_.at(p);
  }

  const detail::BucketGrid& grid() const { return grid_; }

 private:
  void build_caches() {
    const int d = dim();
    const std::size_t l = simplices_.size();
    inv_edge_.assign(l, Eigen::MatrixXd::Zero(d, d));
    nondegenerate_.assign(l, 0);
    measure_.assign(l, 0.0);
    det_.assign(l, 0.0);
    longest_edge_.assign(l, 0.0);
    const double fact = detail::factorial(d);
    for (std::size_t t = 0; t < l; ++t) {
      const auto& s = simplices_[t];
      double longest = 0.0;
      for (std::size_t a = 0; a < s.size(); ++a) {
        for (std::size_t b = a + 1; b < s.size(); ++b) {
          longest = std::max(longest, (nodes_.point(s[a]) - nodes_.point(s[b])).norm());
        }
      }
      longest_edge_[t] = longest;
      const Eigen::MatrixXd a = edge_matrix(t);
      const double det = a.determinant();
      det_[t] = det;
      measure_[t] = std::abs(det) / fact;
      const bool distinct = [&] {
        Simplex sorted = s;
        std::sort(sorted.begin(), sorted.end());
        return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
      }();
      if (distinct && std::abs(det) > 1e-14 * std::pow(longest, d)) {
        inv_edge_[t] = a.inverse();
        nondegenerate_[t] = 1;
      }
    }

    if (d == 2) {
      hull_ = ConvexHull2(nodes_);
      const Eigen::Vector2d lo = nodes_.points().rowwise().minCoeff();
      const Eigen::Vector2d hi = nodes_.points().rowwise().maxCoeff();
      const int side = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(l) / 2.0))));
      const auto& pts = nodes_.points();
      std::vector<double> px(pts.row(0).begin(), pts.row(0).end()), py(pts.row(1).begin(), pts.row(1).end());
      grid_ = detail::BucketGrid(detail::BucketGrid::quantile_breaks(std::move(px), side),
                                 detail::BucketGrid::quantile_breaks(std::move(py), side));
      const double pad = kContainmentTol * std::max(1.0, (hi - lo).norm());
      for (std::size_t t = 0; t < l; ++t) {
        Eigen::Vector2d blo = nodes_.point(simplices_[t][0]);
        Eigen::Vector2d bhi = blo;
        for (int v : simplices_[t]) {
          blo = blo.cwiseMin(Eigen::Vector2d(nodes_.point(v)));
          bhi = bhi.cwiseMax(Eigen::Vector2d(nodes_.point(v)));
        }
        grid_.insert(static_cast<int>(t), blo.array() - pad, bhi.array() + pad);
      }
    }
  }

  NodeSet nodes_;
  std::vector<Simplex> simplices_;
  std::vector<Eigen::MatrixXd> inv_edge_;
  std::vector<char> nondegenerate_;
  std::vector<double> measure_;
  std::vector<double> det_;
  std::vector<double> longest_edge_;
  std::optional<ConvexHull2> hull_;
  detail::BucketGrid grid_;
};

}  // namespace fnelearn

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/geometry/node_set.hpp"
#include "fnelearn/geometry/partition.hpp"
#include "fnelearn/geometry/predicates.hpp"

namespace fnelearn {

namespace detail {

// Planar triangulation under construction: CCW triangles plus a directed
// edge -> triangle map.
class FlipMesh {
 public:
  using Tri = std::array<int, 3>;

  explicit FlipMesh(const Eigen::MatrixXd& pts) : pts_(pts) {}

  geom::Vec2 p(int i) const { return {pts_(0, i), pts_(1, i)}; }

  void add(int a, int b, int c) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back({a, b, c});
    edges_[key(a, b)] = id;
    edges_[key(b, c)] = id;
    edges_[key(c, a)] = id;
  }

  // Lawson flipping until every interior edge is locally Delaunay.
  // Co-circular quadrilaterals are left as constructed.
  void make_delaunay() {
    std::vector<std::pair<int, int>> stack;
    stack.reserve(tris_.size() * 3);
    for (const auto& t : tris_) {
      for (int k = 0; k < 3; ++k) stack.emplace_back(t[k], t[(k + 1) % 3]);
    }
    while (!stack.empty()) {
      const auto [a, b] = stack.back();
      stack.pop_back();
      const auto f1 = edges_.find(key(a, b));
      const auto f2 = edges_.find(key(b, a));
      if (f1 == edges_.end() || f2 == edges_.end()) continue;
      const int t1 = f1->second;
      const int t2 = f2->second;
      const int c = opposite(t1, a, b);
      const int d = opposite(t2, b, a);
      long double perm = 0.0L;
      const long double det = geom::incircle(p(a), p(b), p(c), p(d), &perm);
      if (det <= 1e-12L * perm) continue;

      edges_.erase(key(a, b));
      edges_.erase(key(b, a));
      tris_[static_cast<std::size_t>(t1)] = {a, d, c};
      tris_[static_cast<std::size_t>(t2)] = {d, b, c};
      edges_[key(a, d)] = t1;
      edges_[key(d, c)] = t1;
      edges_[key(c, a)] = t1;
      edges_[key(d, b)] = t2;
      edges_[key(b, c)] = t2;
      edges_[key(c, d)] = t2;
      stack.emplace_back(a, d);
      stack.emplace_back(d, b);
      stack.emplace_back(b, c);
      stack.emplace_back(c, a);
    }
  }

  const std::vector<Tri>& triangles() const { return tris_; }

 private:
  static std::uint64_t key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }
  int opposite(int t, int a, int b) const {
    for (int v : tris_[static_cast<std::size_t>(t)]) {
      if (v != a && v != b) return v;
    }
    return -1;
  }

  const Eigen::MatrixXd& pts_;
  std::vector<Tri> tris_;
  std::unordered_map<std::uint64_t, int> edges_;
};

}  // namespace detail

// Delaunay triangulation of a planar node set. A sorted sweep builds a
// triangulation of the convex hull; Lawson flips then make it Delaunay.
inline SimplicialPartition delaunay_triangulate(const NodeSet& nodes) {
  if (nodes.dim() != 2) throw UnsupportedDimension("delaunay_triangulate: unsupported dimension");
  const Eigen::MatrixXd& pts = nodes.points();
  const int m = static_cast<int>(nodes.size());
  auto p = [&](int i) { return geom::Vec2(pts(0, i), pts(1, i)); };

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (pts(0, a) != pts(0, b)) return pts(0, a) < pts(0, b);
    return pts(1, a) < pts(1, b);
  });

  // Leading run of collinear points.
  std::size_t k = 2;
  while (k < order.size() && geom::orient_sign(p(order[0]), p(order[1]), p(order[k])) == 0) ++k;
  if (k == order.size()) throw DegenerateInput("delaunay_triangulate: all points are collinear");

  detail::FlipMesh mesh(pts);
  const int apex = order[k];
  std::vector<int> hull;  // counter-clockwise
  const bool left = geom::orient(p(order[0]), p(order[1]), p(apex)) > 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    if (left) {
      mesh.add(order[i], order[i + 1], apex);
    } else {
      mesh.add(order[i + 1], order[i], apex);
    }
  }
  if (left) {
    for (std::size_t i = 0; i < k; ++i) hull.push_back(order[i]);
    hull.push_back(apex);
  } else {
    hull.push_back(apex);
    for (std::size_t i = k; i-- > 0;) hull.push_back(order[i]);
  }

  for (std::size_t s = k + 1; s < order.size(); ++s) {
    const int v = order[s];
    const std::size_t h = hull.size();
    // Visible hull edges form one cyclic run; find where it starts.
    std::vector<char> visible(h, 0);
    bool any = false;
    for (std::size_t i = 0; i < h; ++i) {
      visible[i] = geom::orient_sign(p(hull[i]), p(hull[(i + 1) % h]), p(v)) < 0;
      any = any || visible[i];
    }
    if (!any) throw DegenerateInput("delaunay_triangulate: sweep found no visible hull edge");
    std::size_t start = 0;
    while (!(visible[start] && !visible[(start + h - 1) % h])) start = (start + 1) % h;
    std::size_t count = 0;
    while (visible[(start + count) % h]) {
      const int a = hull[(start + count) % h];
      const int b = hull[(start + count + 1) % h];
      mesh.add(b, a, v);
      ++count;
    }
    // Replace the visible chain's interior vertices by v.
    std::vector<int> next;
    next.reserve(h - count + 2);
    const std::size_t first = start;
    const std::size_t last = (start + count) % h;
    next.push_back(hull[first]);
    next.push_back(v);
    for (std::size_t i = last; i != first; i = (i + 1) % h) next.push_back(hull[i]);
    hull = std::move(next);
  }

  mesh.make_delaunay();

  std::vector<Simplex> simplices;
  simplices.reserve(mesh.triangles().size());
  for (const auto& t : mesh.triangles()) simplices.push_back({t[0], t[1], t[2]});
  return SimplicialPartition(nodes, std::move(simplices));
}

}  // namespace fnelearn

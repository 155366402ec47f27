#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/geometry/partition.hpp"

namespace fnelearn {

namespace detail {

// Conforming longest-edge bisection (Rivara's LEPP scheme) on a planar mesh.
// Ties between equal-length edges are broken by vertex index so every
// triangle has a unique longest edge and propagation terminates.
class BisectionMesh {
 public:
  using Tri = std::array<int, 3>;

  explicit BisectionMesh(const SimplicialPartition& p) {
    const auto& pts = p.nodes().points();
    for (Eigen::Index i = 0; i < pts.cols(); ++i) points_.emplace_back(pts(0, i), pts(1, i));
    for (const auto& s : p.simplices()) add({s[0], s[1], s[2]});
  }

  double edge_length(int a, int b) const { return (points_[a] - points_[b]).norm(); }

  // Local index k: the edge is (t[k], t[(k+1)%3]).
  int longest_local_edge(const Tri& t) const {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (edge_less(t[best], t[(best + 1) % 3], t[k], t[(k + 1) % 3])) best = k;
    }
    return best;
  }

  double global_longest() const {
    double l = 0.0;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_[t]) continue;
      for (int k = 0; k < 3; ++k) l = std::max(l, edge_length(tris_[t][k], tris_[t][(k + 1) % 3]));
    }
    return l;
  }

  // Bisects the longest edge of triangle t, first refining whatever the
  // conformity requirement forces along its longest-edge propagation path.
  void refine(int t0) {
    while (alive_[static_cast<std::size_t>(t0)]) {
      int t = t0;
      for (;;) {
        const Tri& tri = tris_[static_cast<std::size_t>(t)];
        const int k = longest_local_edge(tri);
        const int a = tri[k], b = tri[(k + 1) % 3];
        const int nb = neighbour(t, a, b);
        if (nb < 0) {
          bisect_edge(a, b);
          break;
        }
        const Tri& ntri = tris_[static_cast<std::size_t>(nb)];
        const int nk = longest_local_edge(ntri);
        const int na = ntri[nk], nbv = ntri[(nk + 1) % 3];
        if ((na == a && nbv == b) || (na == b && nbv == a)) {
          bisect_edge(a, b);
          break;
        }
        t = nb;
      }
    }
  }

  std::vector<int> alive_with_edge_at_least(double threshold) const {
    std::vector<int> out;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_[t]) continue;
      for (int k = 0; k < 3; ++k) {
        if (edge_length(tris_[t][k], tris_[t][(k + 1) % 3]) >= threshold) {
          out.push_back(static_cast<int>(t));
          break;
        }
      }
    }
    return out;
  }

  bool alive(int t) const { return alive_[static_cast<std::size_t>(t)] != 0; }
  const std::vector<Eigen::Vector2d>& points() const { return points_; }

  std::vector<Simplex> live_simplices() const {
    std::vector<Simplex> out;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (alive_[t]) out.push_back({tris_[t][0], tris_[t][1], tris_[t][2]});
    }
    return out;
  }

 private:
  static std::uint64_t ukey(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }

  // Strict total order on edges: length, then sorted vertex pair.
  bool edge_less(int a, int b, int c, int d) const {
    const double l1 = (points_[a] - points_[b]).squaredNorm();
    const double l2 = (points_[c] - points_[d]).squaredNorm();
    if (l1 != l2) return l1 < l2;
    return std::minmax(a, b) > std::minmax(c, d);
  }

  void add(const Tri& t) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back(t);
    alive_.push_back(1);
    for (int k = 0; k < 3; ++k) edge_tris_[ukey(t[k], t[(k + 1) % 3])].push_back(id);
  }

  void kill(int id) {
    alive_[static_cast<std::size_t>(id)] = 0;
    const Tri& t = tris_[static_cast<std::size_t>(id)];
    for (int k = 0; k < 3; ++k) {
      auto& v = edge_tris_[ukey(t[k], t[(k + 1) % 3])];
      v.erase(std::remove(v.begin(), v.end(), id), v.end());
    }
  }

  int neighbour(int t, int a, int b) const {
    const auto it = edge_tris_.find(ukey(a, b));
    if (it == edge_tris_.end()) return -1;
    for (int u : it->second) {
      if (u != t) return u;
    }
    return -1;
  }

  void bisect_edge(int a, int b) {
    const int mid = static_cast<int>(points_.size());
    points_.push_back(0.5 * (points_[a] + points_[b]));
    const std::vector<int> owners = edge_tris_[ukey(a, b)];
    for (int id : owners) {
      Tri t = tris_[static_cast<std::size_t>(id)];
      // Rotate so the split edge is (t[0], t[1]).
      while (ukey(t[0], t[1]) != ukey(a, b)) t = {t[1], t[2], t[0]};
      kill(id);
      add({t[0], mid, t[2]});
      add({mid, t[1], t[2]});
    }
  }

  std::vector<Eigen::Vector2d> points_;
  std::vector<Tri> tris_;
  std::vector<char> alive_;
  std::unordered_map<std::uint64_t, std::vector<int>> edge_tris_;
};

}  // namespace detail

// One refinement step: bisects every triangle tied (within 1e-12) for the
// global longest edge, keeping the partition face-to-face. New midpoint nodes
// are appended after the input nodes, so the input node order is preserved.
inline SimplicialPartition bisect_longest_edge(const SimplicialPartition& p) {
  if (p.dim() != 2) throw UnsupportedDimension("bisect_longest_edge: unsupported dimension");
  detail::BisectionMesh mesh(p);
  const double longest = mesh.global_longest();
  const double threshold = longest * (1.0 - 1e-12);
  for (;;) {
    const auto todo = mesh.alive_with_edge_at_least(threshold);
    if (todo.empty()) break;
    for (int t : todo) {
      if (!mesh.alive(t)) continue;
      mesh.refine(t);
    }
  }
  const auto& pts = mesh.points();
  Eigen::MatrixXd all(2, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) all.col(static_cast<Eigen::Index>(i)) = pts[i];
  return SimplicialPartition(NodeSet(std::move(all)), mesh.live_simplices());
}

}  // namespace fnelearn

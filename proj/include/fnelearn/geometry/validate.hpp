#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fnelearn/geometry/partition.hpp"
#include "fnelearn/geometry/predicates.hpp"

namespace fnelearn {

struct PropertyCheck {
  bool passed = true;
  std::string detail;
  std::optional<int> simplex;                   // offending simplex, when a single one
  std::optional<std::pair<int, int>> pair;      // offending simplex pair
};

struct ValidationReport {
  PropertyCheck cover;        // (P1) union of simplices covers conv(D)
  PropertyCheck nondegenerate;  // (P2) every simplex has positive measure
  PropertyCheck face_to_face;   // (P3) simplices meet in common faces only
  double measure_deficit = 0.0;  // meas conv(D) - sum of simplex measures

  bool ok() const { return cover.passed && nondegenerate.passed && face_to_face.passed; }

  std::string summary() const {
    std::ostringstream os;
    auto line = [&](const char* name, const PropertyCheck& c) {
      os << name << ": " << (c.passed ? "pass" : "FAIL");
      if (!c.detail.empty()) os << " (" << c.detail << ")";
      os << '\n';
    };
    line("P1 cover", cover);
    line("P2 nondegenerate", nondegenerate);
    line("P3 face-to-face", face_to_face);
    return os.str();
  }
};

namespace detail {

// Strict point-in-closed-triangle test with a relative tolerance band.
inline bool triangle_contains(const geom::Vec2& a, const geom::Vec2& b, const geom::Vec2& c,
                              const geom::Vec2& p, double tol) {
  const double area2 = std::abs(geom::orient(a, b, c));
  if (area2 == 0.0) return false;
  const double sign = geom::orient(a, b, c) > 0.0 ? 1.0 : -1.0;
  const double w0 = sign * geom::orient(b, c, p) / area2;
  const double w1 = sign * geom::orient(c, a, p) / area2;
  const double w2 = sign * geom::orient(a, b, p) / area2;
  return w0 >= -tol && w1 >= -tol && w2 >= -tol;
}

// Proper crossing of two segments: interiors intersect in a single point.
inline bool segments_cross(const geom::Vec2& a, const geom::Vec2& b, const geom::Vec2& c,
                           const geom::Vec2& d) {
  const int o1 = geom::orient_sign(a, b, c, 1e-10);
  const int o2 = geom::orient_sign(a, b, d, 1e-10);
  const int o3 = geom::orient_sign(c, d, a, 1e-10);
  const int o4 = geom::orient_sign(c, d, b, 1e-10);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

}  // namespace detail

// Checks (P1)-(P3). Failures are reported, never thrown. The face-to-face
// test (d = 2) looks for nodes inside or on foreign triangles, properly
// crossing edges, and duplicated triangles.
inline ValidationReport validate_partition(const SimplicialPartition& p) {
  ValidationReport report;
  const int d = p.dim();
  const std::size_t l = p.size();

  for (std::size_t t = 0; t < l; ++t) {
    const auto& s = p.simplex(t);
    Simplex sorted = s;
    std::sort(sorted.begin(), sorted.end());
    const bool distinct = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
    if (!distinct || !p.is_nondegenerate(t) || p.measure(t) <= 0.0) {
      report.nondegenerate.passed = false;
      report.nondegenerate.simplex = static_cast<int>(t);
      report.nondegenerate.detail = "simplex " + std::to_string(t) + " has zero measure";
      break;
    }
  }

  if (d != 2) {
    report.cover.passed = false;
    report.cover.detail = "unsupported dimension";
    report.face_to_face.passed = false;
    report.face_to_face.detail = "unsupported dimension";
    return report;
  }

  const double hull_area = p.hull().area();
  const double total = p.total_measure();
  report.measure_deficit = hull_area - total;
  if (std::abs(report.measure_deficit) > 1e-9 * hull_area) {
    report.cover.passed = false;
    std::ostringstream os;
    os.precision(17);
    os << "measure deficit " << report.measure_deficit << " of hull measure " << hull_area;
    report.cover.detail = os.str();
  }

  const auto& pts = p.nodes().points();
  auto pt = [&](int i) { return geom::Vec2(pts(0, i), pts(1, i)); };
  const auto& grid = p.grid();

  // Incident triangle per node, to name a pair on failure.
  std::vector<int> incident(static_cast<std::size_t>(pts.cols()), -1);
  for (std::size_t t = 0; t < l; ++t) {
    for (int v : p.simplex(t)) {
      if (incident[static_cast<std::size_t>(v)] < 0) incident[static_cast<std::size_t>(v)] = static_cast<int>(t);
    }
  }

  auto fail = [&](int t, int u, std::string why) {
    report.face_to_face.passed = false;
    report.face_to_face.pair = std::make_pair(std::min(t, u), std::max(t, u));
    report.face_to_face.detail = std::move(why);
  };

  // Duplicate triangles.
  {
    std::vector<std::pair<Simplex, int>> keyed;
    keyed.reserve(l);
    for (std::size_t t = 0; t < l; ++t) {
      Simplex s = p.simplex(t);
      std::sort(s.begin(), s.end());
      keyed.emplace_back(std::move(s), static_cast<int>(t));
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 1; i < keyed.size(); ++i) {
      if (keyed[i].first == keyed[i - 1].first) {
        fail(keyed[i - 1].second, keyed[i].second, "duplicated simplex");
        return report;
      }
    }
  }

  // Nodes lying in a triangle they are not a vertex of (T-vertices included).
  for (Eigen::Index v = 0; v < pts.cols(); ++v) {
    const int owner = incident[static_cast<std::size_t>(v)];
    if (owner < 0) continue;
    const geom::Vec2 q = pt(static_cast<int>(v));
    for (int t : grid.at(q)) {
      const auto& s = p.simplex(static_cast<std::size_t>(t));
      if (std::find(s.begin(), s.end(), static_cast<int>(v)) != s.end()) continue;
      if (detail::triangle_contains(pt(s[0]), pt(s[1]), pt(s[2]), q, 1e-10)) {
        fail(t, owner, "node " + std::to_string(v) + " lies in simplex " + std::to_string(t) +
                           " without being one of its vertices");
        return report;
      }
    }
  }

  // Properly crossing edges.
  for (std::size_t t = 0; t < l; ++t) {
    const auto& s = p.simplex(t);
    geom::Vec2 lo = pt(s[0]), hi = pt(s[0]);
    for (int v : s) {
      lo = lo.cwiseMin(pt(v));
      hi = hi.cwiseMax(pt(v));
    }
    bool crossed = false;
    int other = -1;
    grid.for_each_in(lo, hi, [&](int u) {
      if (crossed || u <= static_cast<int>(t)) return;
      const auto& r = p.simplex(static_cast<std::size_t>(u));
      for (int i = 0; i < 3 && !crossed; ++i) {
        for (int j = 0; j < 3 && !crossed; ++j) {
          if (detail::segments_cross(pt(s[i]), pt(s[(i + 1) % 3]), pt(r[j]), pt(r[(j + 1) % 3]))) {
            crossed = true;
            other = u;
          }
        }
      }
    });
    if (crossed) {
      fail(static_cast<int>(t), other, "edges of simplices cross");
      return report;
    }
  }
  return report;
}

struct PartitionMetrics {
  double longest_edge = 0.0;
  double min_measure = 0.0;
  double min_inv_edge_norm = 0.0;  // max_t ||A_t^{-1}||_2
};

inline PartitionMetrics partition_metrics(const SimplicialPartition& p) {
  PartitionMetrics m;
  m.min_measure = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < p.size(); ++t) {
    m.longest_edge = std::max(m.longest_edge, p.longest_edge(t));
    m.min_measure = std::min(m.min_measure, p.measure(t));
    if (p.is_nondegenerate(t)) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.inverse_edge_matrix(t));
      m.min_inv_edge_norm = std::max(m.min_inv_edge_norm, svd.singularValues()(0));
    } else {
      m.min_inv_edge_norm = std::numeric_limits<double>::infinity();
    }
  }
  if (p.size() == 0) m.min_measure = 0.0;
  return m;
}

}  // namespace fnelearn

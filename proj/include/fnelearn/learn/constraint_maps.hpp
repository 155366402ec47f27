#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/geometry/partition.hpp"
#include "fnelearn/learn/training_set.hpp"

namespace fnelearn {

// L_t : R^{d x m} -> R^{d x d}, Y -> B_t(Y) A_t^{-1} = (Y E_t) A_t^{-1}, where
// E_t is the signed incidence matrix of simplex t (+1 at i_j, -1 at i_0 in
// column j).
struct ConstraintMap {
  Simplex vertices;
  Eigen::MatrixXd inv_edge;  // A_t^{-1}

  Eigen::MatrixXd apply(const Eigen::MatrixXd& y) const {
    const auto d = y.rows();
    Eigen::MatrixXd b(d, d);
    for (Eigen::Index j = 1; j <= d; ++j) {
      b.col(j - 1) = y.col(vertices[static_cast<std::size_t>(j)]) - y.col(vertices[0]);
    }
    return b * inv_edge;
  }

  // out += scale * L_t^*(M) with L_t^*(M) = M A_t^{-T} E_t^T.
  void accumulate_adjoint(const Eigen::MatrixXd& mat, Eigen::MatrixXd& out, double scale = 1.0) const {
    const Eigen::MatrixXd w = mat * inv_edge.transpose();
    for (Eigen::Index j = 1; j <= w.cols(); ++j) {
      out.col(vertices[static_cast<std::size_t>(j)]) += scale * w.col(j - 1);
      out.col(vertices[0]) -= scale * w.col(j - 1);
    }
  }

  Eigen::MatrixXd adjoint(const Eigen::MatrixXd& mat, Eigen::Index columns) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mat.rows(), columns);
    accumulate_adjoint(mat, out);
    return out;
  }
};

// The first n partition nodes must equal the training inputs, in order.
// Extra (constraint-only) nodes are accepted only when allowed.
inline void check_nodes_match(const TrainingSet& ts, const SimplicialPartition& p,
                              bool allow_constraint_only_nodes) {
  const auto& nodes = p.nodes().points();
  if (nodes.rows() != ts.dim()) throw NodeMismatch("partition dimension differs from training set");
  if (nodes.cols() < ts.size() || (!allow_constraint_only_nodes && nodes.cols() != ts.size())) {
    throw NodeMismatch("partition has " + std::to_string(nodes.cols()) + " nodes for " +
                       std::to_string(ts.size()) + " training pairs");
  }
  if (nodes.leftCols(ts.size()) != ts.inputs()) {
    throw NodeMismatch("partition nodes differ from training inputs");
  }
}

inline std::vector<ConstraintMap> assemble_constraint_maps(const TrainingSet& ts,
                                                           const SimplicialPartition& p,
                                                           bool allow_constraint_only_nodes = false) {
  check_nodes_match(ts, p, allow_constraint_only_nodes);
  std::vector<ConstraintMap> maps;
  maps.reserve(p.size());
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (!p.is_nondegenerate(t)) {
      throw SingularSystem("constraint maps: simplex " + std::to_string(t) + " is degenerate");
    }
    maps.push_back({p.simplex(t), p.inverse_edge_matrix(t)});
  }
  return maps;
}

}  // namespace fnelearn

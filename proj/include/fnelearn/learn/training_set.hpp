#pragma once

#include <Eigen/Core>

#include <string>

#include "fnelearn/errors.hpp"
#include "fnelearn/geometry/node_set.hpp"

namespace fnelearn {

// Pairs (x_i, z_i) in R^d, column-wise. The nonexpansive learning targets
// are the reflections y_i = 2 z_i - x_i.
class TrainingSet {
 public:
  TrainingSet() = default;

  TrainingSet(Eigen::MatrixXd inputs, Eigen::MatrixXd targets)
      : inputs_(std::move(inputs)), targets_(std::move(targets)) {
    if (inputs_.rows() != targets_.rows() || inputs_.cols() != targets_.cols()) {
      throw ShapeMismatch("training set: inputs and targets must have the same shape");
    }
    if (inputs_.cols() == 0) throw EmptyInput("training set: no pairs");
    if (!inputs_.allFinite() || !targets_.allFinite()) {
      throw DegenerateInput("training set: non-finite entry");
    }
  }

  int dim() const { return static_cast<int>(inputs_.rows()); }
  Eigen::Index size() const { return inputs_.cols(); }

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::MatrixXd& targets() const { return targets_; }
  Eigen::MatrixXd reflected_targets() const { return 2.0 * targets_ - inputs_; }

  // Inputs as a node set; enforces distinctness, n > d and full affine rank.
  NodeSet input_nodes() const {
    if (size() <= dim()) {
      throw DegenerateInput("training set: need n > d pairs, got " + std::to_string(size()));
    }
    return NodeSet(inputs_);
  }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::MatrixXd targets_;
};

}  // namespace fnelearn

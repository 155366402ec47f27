#pragma once

#include <Eigen/Core>

#include "fnelearn/errors.hpp"
#include "fnelearn/learn/training_set.hpp"
#include "fnelearn/paop.hpp"

namespace fnelearn {

// (1/n) sum_i ||y_i - ybar_i||^2 over the first n columns of `values`.
inline double empirical_risk(const Eigen::MatrixXd& values, const TrainingSet& ts) {
  if (values.rows() != ts.dim() || values.cols() < ts.size()) {
    throw ShapeMismatch("empirical_risk: values must be d x m with m >= n");
  }
  return (values.leftCols(ts.size()) - ts.reflected_targets()).squaredNorm() /
         static_cast<double>(ts.size());
}

// Same quantity through evaluate(), i.e. (1/n) sum_i ||N(xbar_i) - ybar_i||^2.
inline double empirical_risk(const PiecewiseAffineOperator& op, const TrainingSet& ts) {
  if (op.dim() != ts.dim()) throw ShapeMismatch("empirical_risk: dimension mismatch");
  const Eigen::MatrixXd y = ts.reflected_targets();
  double s = 0.0;
  for (Eigen::Index i = 0; i < ts.size(); ++i) s += (op.evaluate(ts.inputs().col(i)) - y.col(i)).squaredNorm();
  return s / static_cast<double>(ts.size());
}

}  // namespace fnelearn

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/geometry/partition.hpp"
#include "fnelearn/linalg.hpp"

namespace fnelearn {

struct OperatorMeta {
  double epsilon_margin = 0.0;
  double training_noise = 0.0;
  std::uint64_t seed = 0;
};

// N = Ntilde o pi_conv(D): affine on every simplex, interpolating `values`
// at the nodes, extended to R^d through the hull projection.
class PiecewiseAffineOperator {
 public:
  PiecewiseAffineOperator(std::shared_ptr<const SimplicialPartition> partition,
                          Eigen::MatrixXd values, OperatorMeta meta = {})
      : partition_(std::move(partition)), meta_(meta) {
    if (!partition_) throw DegenerateInput("operator: null partition");
    for (std::size_t t = 0; t < partition_->size(); ++t) {
      if (!partition_->is_nondegenerate(t)) {
        throw SingularSystem("operator: simplex " + std::to_string(t) + " is degenerate");
      }
    }
    if (partition_->dim() == 2) {
      const auto& pts = partition_->nodes().points();
      inv2_.reserve(partition_->size());
      base2_.reserve(partition_->size());
      for (std::size_t t = 0; t < partition_->size(); ++t) {
        inv2_.emplace_back(partition_->inverse_edge_matrix(t));
        base2_.emplace_back(pts.col(partition_->simplex(t)[0]));
      }
    }
    set_values(std::move(values));
  }

  const SimplicialPartition& partition() const { return *partition_; }
  const std::shared_ptr<const SimplicialPartition>& partition_ptr() const { return partition_; }
  int dim() const { return partition_->dim(); }
  const Eigen::MatrixXd& values() const { return values_; }
  const OperatorMeta& meta() const { return meta_; }
  void set_meta(const OperatorMeta& m) { meta_ = m; }

  // Replaces node values; edge-matrix inverses are kept, Jacobians recomputed.
  void set_values(Eigen::MatrixXd values) {
    if (values.rows() != dim() || values.cols() != partition_->nodes().size()) {
      throw ShapeMismatch("operator: values must be d x m (" + std::to_string(dim()) + " x " +
                          std::to_string(partition_->nodes().size()) + ")");
    }
    values_ = std::move(values);
    const int d = dim();
    jac_.assign(partition_->size(), Eigen::MatrixXd(d, d));
    jac2_.clear();
    for (std::size_t t = 0; t < partition_->size(); ++t) {
      const auto& s = partition_->simplex(t);
      Eigen::MatrixXd b(d, d);
      for (int j = 1; j <= d; ++j) b.col(j - 1) = values_.col(s[j]) - values_.col(s[0]);
      jac_[t] = b * partition_->inverse_edge_matrix(t);
      if (d == 2) jac2_.emplace_back(jac_[t]);
    }
  }

  // J_t = B_t A_t^{-1}.
  const Eigen::MatrixXd& jacobian(std::size_t t) const {
    if (t >= jac_.size()) {
      throw IndexOutOfRange("jacobian: simplex " + std::to_string(t) + " out of range");
    }
    return jac_[t];
  }

  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (dim() != 2) throw UnsupportedDimension("evaluate: hull projection needs d = 2");
    return partition_->hull().project(Eigen::Vector2d(x(0), x(1)));
  }

  // y_{i0} + J_t (pi(x) - x_{i0}) with t the simplex holding pi(x).
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim()) throw ShapeMismatch("evaluate: point dimension mismatch");
    if (dim() == 2) return evaluate2(Eigen::Vector2d(x(0), x(1)));
    const auto loc = partition_->locate(x);
    const auto& s = partition_->simplex(static_cast<std::size_t>(loc.simplex_index));
    for (std::size_t j = 1; j < s.size(); ++j) {
      if (partition_->nodes().point(s[j]) == x) return values_.col(s[j]);
    }
    return values_.col(s[0]) +
           jac_[static_cast<std::size_t>(loc.simplex_index)] * (x - partition_->nodes().point(s[0]));
  }

  // Sum_i lambda_i(pi(x)) y_i; agrees with evaluate() up to rounding.
  Eigen::VectorXd evaluate_barycentric(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const Eigen::VectorXd q = dim() == 2 ? project(x) : Eigen::VectorXd(x);
    const auto loc = partition_->locate(q);
    const auto& s = partition_->simplex(static_cast<std::size_t>(loc.simplex_index));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
    for (std::size_t j = 0; j < s.size(); ++j) out += loc.weights(static_cast<Eigen::Index>(j)) * values_.col(s[j]);
    return out;
  }

  // Allocation-free planar evaluation; same simplex choice as locate().
  Eigen::Vector2d evaluate2(const Eigen::Vector2d& x) const {
    const Eigen::Vector2d q = partition_->hull().project(x);
    const std::vector<int>& cand = *partition_->candidates(q);
    int loose = -1;
    for (int t : cand) {
      const auto ut = static_cast<std::size_t>(t);
      const Eigen::Vector2d r = q - base2_[ut];
      const Eigen::Vector2d w = inv2_[ut] * r;
      const double lo = std::min(1.0 - w.sum(), w.minCoeff());
      if (lo >= -kStrictContainmentTol) return apply_affine(ut, q, r);
      if (loose < 0 && lo >= -kContainmentTol) loose = t;
    }
    if (loose >= 0) {
      // Clamp to the simplex like locate() does.
      const auto ut = static_cast<std::size_t>(loose);
      Eigen::Vector2d w = inv2_[ut] * (q - base2_[ut]);
      Eigen::Vector3d lam(1.0 - w.sum(), w.x(), w.y());
      lam = lam.cwiseMax(0.0);
      lam /= lam.sum();
      const auto& s = partition_->simplex(ut);
      return lam(0) * Eigen::Vector2d(values_.col(s[0])) + lam(1) * Eigen::Vector2d(values_.col(s[1])) +
             lam(2) * Eigen::Vector2d(values_.col(s[2]));
    }
    throw OutsideHull("evaluate: projected point not located");
  }

 private:
  Eigen::Vector2d apply_affine(std::size_t t, const Eigen::Vector2d& q, const Eigen::Vector2d& r) const {
    const auto& s = partition_->simplex(t);
    // Nodes reproduce their values bit-exactly.
    const auto& pts = partition_->nodes().points();
    for (std::size_t j = 1; j < s.size(); ++j) {
      if (pts(0, s[j]) == q.x() && pts(1, s[j]) == q.y()) return values_.col(s[j]);
    }
    return Eigen::Vector2d(values_(0, s[0]), values_(1, s[0])) + jac2_[t] * r;
  }

  std::shared_ptr<const SimplicialPartition> partition_;
  Eigen::MatrixXd values_;
  OperatorMeta meta_;
  std::vector<Eigen::MatrixXd> jac_;
  std::vector<Eigen::Matrix2d> jac2_;
  std::vector<Eigen::Matrix2d> inv2_;
  std::vector<Eigen::Vector2d> base2_;
};

struct LipschitzAudit {
  std::vector<double> per_simplex;
  double max = 0.0;
  int argmax_simplex = -1;
};

inline LipschitzAudit lipschitz_audit(const PiecewiseAffineOperator& op) {
  LipschitzAudit a;
  const auto l = op.partition().size();
  a.per_simplex.resize(l);
  for (std::size_t t = 0; t < l; ++t) {
    a.per_simplex[t] = linalg::spectral_norm(op.jacobian(t));
    if (a.argmax_simplex < 0 || a.per_simplex[t] > a.max) {
      a.max = a.per_simplex[t];
      a.argmax_simplex = static_cast<int>(t);
    }
  }
  return a;
}

inline constexpr double kLiftWarnThreshold = 1.0 + 1e-6;
inline constexpr double kLiftErrorThreshold = 1.05;

// T = (Id + N) / 2 for a (near-)nonexpansive piecewise-affine N.
class FirmlyNonexpansiveMap {
 public:
  FirmlyNonexpansiveMap(std::shared_ptr<const PiecewiseAffineOperator> n, double lipschitz)
      : n_(std::move(n)), lipschitz_(lipschitz) {}

  Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return 0.5 * (x + n_->evaluate(x));
  }
  Eigen::Vector2d apply2(const Eigen::Vector2d& x) const { return 0.5 * (x + n_->evaluate2(x)); }

  const PiecewiseAffineOperator& reflected() const { return *n_; }
  double lipschitz_of_reflection() const { return lipschitz_; }

 private:
  std::shared_ptr<const PiecewiseAffineOperator> n_;
  double lipschitz_;
};

inline FirmlyNonexpansiveMap to_firmly_nonexpansive(std::shared_ptr<const PiecewiseAffineOperator> op,
                                                    std::ostream* warnings = &std::clog) {
  const auto audit = lipschitz_audit(*op);
  if (audit.max > kLiftErrorThreshold) {
    throw NotNonexpansive("to_firmly_nonexpansive: Lipschitz constant " + std::to_string(audit.max) +
                          " on simplex " + std::to_string(audit.argmax_simplex) + " exceeds " +
                          std::to_string(kLiftErrorThreshold));
  }
  if (audit.max > kLiftWarnThreshold && warnings != nullptr) {
    *warnings << "warning: operator Lipschitz constant " << audit.max
              << " exceeds 1; the lift is only approximately firmly nonexpansive\n";
  }
  return FirmlyNonexpansiveMap(std::move(op), audit.max);
}

// max over pairs of ||Tx - Tx'||^2 + ||(x - Tx) - (x' - Tx')||^2 - ||x - x'||^2.
template <class Map>
double check_fne(const Map& t, const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [x, xp] : pairs) {
    const Eigen::VectorXd tx = t(x);
    const Eigen::VectorXd txp = t(xp);
    const double lhs = (tx - txp).squaredNorm() + ((x - tx) - (xp - txp)).squaredNorm();
    worst = std::max(worst, lhs - (x - xp).squaredNorm());
  }
  return worst;
}

}  // namespace fnelearn

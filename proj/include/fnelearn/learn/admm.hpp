#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/geometry/partition.hpp"
#include "fnelearn/learn/constraint_maps.hpp"
#include "fnelearn/learn/spectral_ball.hpp"
#include "fnelearn/learn/training_set.hpp"
#include "fnelearn/linalg.hpp"
#include "fnelearn/paop.hpp"

namespace fnelearn {

struct AdmmConfig {
  double rho0 = 1.0;
  double rho_growth = 1.5;
  double rho_max = 3e3;
  int k_stationary = 50;
  int max_iters = 20000;
  double tol_primal = 1e-6;
  double tol_dual = 1e-6;
  double epsilon_margin = 0.01;
  // Partition nodes beyond the n training inputs carry constraints only.
  bool allow_constraint_only_nodes = false;
  // Over-relaxation factor in (0, 2).
  double relaxation = 1.8;
  // Simplex t is penalised by rho (med_s ||A_s^-1|| / ||A_t^-1||)^penalty_exponent.
  double penalty_exponent = 0.5;

  void validate() const {
    if (!(rho0 > 0.0)) throw InvalidConfig("admm: rho0 must be positive");
    if (!(rho_growth >= 1.0)) throw InvalidConfig("admm: rho_growth must be >= 1");
    if (!(rho_max >= rho0)) throw InvalidConfig("admm: rho_max must be >= rho0");
    if (!(tol_primal > 0.0) || !(tol_dual > 0.0)) throw InvalidConfig("admm: tolerances must be positive");
    if (!(epsilon_margin >= 0.0 && epsilon_margin < 1.0)) {
      throw InvalidConfig("admm: epsilon_margin must lie in [0, 1)");
    }
    if (max_iters < 1) throw InvalidConfig("admm: max_iters must be >= 1");
    if (k_stationary < 0) throw InvalidConfig("admm: k_stationary must be >= 0");
    if (!(relaxation > 0.0 && relaxation < 2.0)) throw InvalidConfig("admm: relaxation must lie in (0, 2)");
    if (!std::isfinite(penalty_exponent)) throw InvalidConfig("admm: penalty_exponent must be finite");
  }
};

struct AdmmState {
  Eigen::MatrixXd y;                 // d x m node values
  std::vector<Eigen::MatrixXd> u;    // per-simplex auxiliary U_t
  std::vector<Eigen::MatrixXd> lambda;  // per-simplex scaled duals
  double rho = 0.0;
  int iteration = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct ConvergenceRow {
  int iter = 0;
  double rho = 0.0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double max_lipschitz = 0.0;
};

struct ConvergenceLog {
  std::vector<ConvergenceRow> rows;

  void write_csv(std::ostream& os) const {
    os << "iter,rho,objective,primal_residual,dual_residual,max_lipschitz\n";
    os.precision(17);
    for (const auto& r : rows) {
      os << r.iter << ',' << r.rho << ',' << r.objective << ',' << r.primal_residual << ','
         << r.dual_residual << ',' << r.max_lipschitz << '\n';
    }
  }
};

struct TrainResult {
  std::shared_ptr<PiecewiseAffineOperator> op;
  ConvergenceLog log;
  AdmmState state;
  bool converged = false;
  double objective = 0.0;
};

// ADMM on  min_Y (1/n)||Y - Ybar||_F^2 + sum_t g(U_t)  s.t.  U_t = L_t Y,
// g the indicator of the spectral ball of radius 1 - epsilon. D is the
// compile-time dimension (Eigen::Dynamic for general d).
template <int D = Eigen::Dynamic>
class AdmmSolver {
 public:
  using Mat = Eigen::Matrix<double, D, D>;

  AdmmSolver(const TrainingSet& ts, std::shared_ptr<const SimplicialPartition> partition,
             AdmmConfig cfg, const Eigen::MatrixXd* initial_values = nullptr)
      : partition_(std::move(partition)), cfg_(cfg) {
    cfg_.validate();
    if (D != Eigen::Dynamic && partition_->dim() != D) throw ShapeMismatch("admm: dimension mismatch");
    d_ = partition_->dim();
    n_ = ts.size();
    m_ = partition_->nodes().size();
    check_nodes_match(ts, *partition_, cfg_.allow_constraint_only_nodes);
    radius_ = 1.0 - cfg_.epsilon_margin;

    const std::size_t l = partition_->size();
    for (std::size_t t = 0; t < l; ++t) {
      const double le = partition_->longest_edge(t);
      if (std::abs(partition_->determinant(t)) < 1e-12 * std::pow(le, d_) || !partition_->is_nondegenerate(t)) {
        throw SingularSystem("admm: simplex " + std::to_string(t) + " is degenerate");
      }
    }
    inv_.resize(l);
    for (std::size_t t = 0; t < l; ++t) inv_[t] = partition_->inverse_edge_matrix(t);
    std::vector<double> nrm(l);
    for (std::size_t t = 0; t < l; ++t) nrm[t] = norm(inv_[t]);
    std::vector<double> sorted = nrm;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(l / 2), sorted.end());
    const double med = sorted[l / 2];
    pen_.resize(l);
    for (std::size_t t = 0; t < l; ++t) pen_[t] = std::pow(med / nrm[t], cfg_.penalty_exponent);

    data_t_ = Eigen::MatrixXd::Zero(m_, d_);
    data_t_.topRows(n_) = ts.reflected_targets().transpose();

    assemble_laplacian();

    y_t_ = Eigen::MatrixXd::Zero(m_, d_);
    if (initial_values != nullptr) {
      if (initial_values->rows() != d_ || initial_values->cols() != m_) {
        throw ShapeMismatch("admm: initial values must be d x m");
      }
      y_t_ = initial_values->transpose();
    } else {
      y_t_.topRows(n_) = data_t_.topRows(n_);
    }
    u_.resize(l);
    lam_.assign(l, Mat::Zero(d_, d_));
    ly_.resize(l);
    for (std::size_t t = 0; t < l; ++t) {
      ly_[t] = apply_map(t);
      u_[t] = project(ly_[t]);
    }
    rho_ = cfg_.rho0;
    factorize();
  }

  // Exact minimiser of the augmented Lagrangian in Y for the current U, Lambda.
  void y_step() {
    Eigen::MatrixXd rhs = (2.0 / static_cast<double>(n_)) * data_t_;
    for (std::size_t t = 0; t < u_.size(); ++t) {
      const Mat w = (u_[t] - lam_[t]) * inv_[t].transpose();
      scatter_adjoint(t, w, rho_ * pen_[t], rhs);
    }
    last_rhs_norm_ = rhs.norm();
    y_t_ = chol_.solve(rhs);
    if (chol_.info() != Eigen::Success || !y_t_.allFinite()) {
      throw SingularSystem("admm: Y-step solve failed");
    }
    for (std::size_t t = 0; t < u_.size(); ++t) ly_[t] = apply_map(t);
  }

  void u_step() {
    u_prev_ = u_;
    const double a = cfg_.relaxation;
    lhat_.resize(u_.size());
    for (std::size_t t = 0; t < u_.size(); ++t) {
      lhat_[t] = a == 1.0 ? ly_[t] : Mat(a * ly_[t] + (1.0 - a) * u_prev_[t]);
      u_[t] = project(lhat_[t] + lam_[t]);
    }
  }

  void dual_step() {
    for (std::size_t t = 0; t < u_.size(); ++t) lam_[t] += lhat_[t] - u_[t];
  }

  // One full iteration; returns true once both residuals are below tolerance.
  bool iterate() {
    const bool done = pass();
    if (!done && iteration_ < cfg_.k_stationary) grow_rho();
    return done;
  }

  TrainResult run() {
    bool converged = false;
    while (iteration_ < cfg_.max_iters && !(converged = iterate())) {
    }
    TrainResult r;
    r.converged = converged;
    r.objective = objective();
    r.log = log_;
    r.state = state();
    OperatorMeta meta;
    meta.epsilon_margin = cfg_.epsilon_margin;
    r.op = std::make_shared<PiecewiseAffineOperator>(partition_, values(), meta);
    return r;
  }

  // (1/n) sum_{i<n} ||y_i - ybar_i||^2.
  double objective() const {
    return (y_t_.topRows(n_) - data_t_.topRows(n_)).squaredNorm() / static_cast<double>(n_);
  }

  // Norm of the augmented-Lagrangian gradient in Y at the current iterate,
  // using the current U and Lambda.
  double y_gradient_norm() const {
    Eigen::MatrixXd g = (2.0 / static_cast<double>(n_)) * (y_t_ - data_t_);
    g.bottomRows(m_ - n_).setZero();
    for (std::size_t t = 0; t < u_.size(); ++t) {
      const Mat w = (apply_map(t) - u_[t] + lam_[t]) * inv_[t].transpose();
      scatter_adjoint(t, w, rho_ * pen_[t], g);
    }
    return g.norm();
  }
  double last_rhs_norm() const { return last_rhs_norm_; }

  Eigen::MatrixXd values() const { return y_t_.transpose(); }
  const ConvergenceLog& log() const { return log_; }

  AdmmState state() const {
    AdmmState s;
    s.y = values();
    for (const auto& u : u_) s.u.emplace_back(u);
    for (const auto& l : lam_) s.lambda.emplace_back(l);
    s.rho = rho_;
    s.iteration = iteration_;
    s.primal_residual = primal_;
    s.dual_residual = dual_;
    return s;
  }

 private:
  // Plain ADMM sweep from the current (U, Lambda); logs one row.
  bool pass() {
    y_step();
    u_step();
    dual_step();
    double primal = 0.0, dual = 0.0, lip = 0.0;
    for (std::size_t t = 0; t < u_.size(); ++t) {
      primal = std::max(primal, (ly_[t] - u_[t]).norm());
      dual = std::max(dual, rho_ * pen_[t] * (u_[t] - u_prev_[t]).norm());
      lip = std::max(lip, norm(ly_[t]));
    }
    primal_ = primal;
    dual_ = dual;
    ++iteration_;
    log_.rows.push_back({iteration_, rho_, objective(), primal, dual, lip});
    return primal <= cfg_.tol_primal && dual <= cfg_.tol_dual;
  }

  void grow_rho() {
    const double next = std::min(cfg_.rho_max, cfg_.rho_growth * rho_);
    if (next == rho_) return;
    const double scale = rho_ / next;
    for (auto& l : lam_) l *= scale;
    rho_ = next;
    factorize();
  }

  Mat apply_map(std::size_t t) const {
    const auto& s = partition_->simplex(t);
    Mat b = Mat::Zero(d_, d_);
    for (int j = 1; j <= d_; ++j) b.col(j - 1) = (y_t_.row(s[static_cast<std::size_t>(j)]) - y_t_.row(s[0])).transpose();
    return b * inv_[t];
  }

  // out (m x d, transposed layout) += scale * (W E_t^T)^T.
  void scatter_adjoint(std::size_t t, const Mat& w, double scale, Eigen::MatrixXd& out) const {
    const auto& s = partition_->simplex(t);
    for (int j = 1; j <= d_; ++j) {
      out.row(s[static_cast<std::size_t>(j)]) += scale * w.col(j - 1).transpose();
      out.row(s[0]) -= scale * w.col(j - 1).transpose();
    }
  }

  Mat project(const Mat& m) const {
    if constexpr (D == 2) {
      return project_spectral_ball2(m, radius_);
    } else {
      return project_spectral_ball(m, radius_);
    }
  }

  static double norm(const Mat& m) {
    if constexpr (D == 2) {
      return linalg::spectral_norm2(m);
    } else {
      return linalg::spectral_norm(m);
    }
  }

  // K = sum_t E_t A_t^{-1} A_t^{-T} E_t^T (m x m, sparse).
  void assemble_laplacian() {
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d_ + 1, d_);
    c.row(0).setConstant(-1.0);
    c.bottomRows(d_).setIdentity();
    for (std::size_t t = 0; t < partition_->size(); ++t) {
      const Eigen::MatrixXd inv = inv_[t];
      const Eigen::MatrixXd blk = pen_[t] * (c * (inv * inv.transpose()) * c.transpose());
      const auto& s = partition_->simplex(t);
      for (int a = 0; a <= d_; ++a) {
        for (int b = 0; b <= d_; ++b) trip.emplace_back(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)], blk(a, b));
      }
    }
    laplacian_.resize(m_, m_);
    laplacian_.setFromTriplets(trip.begin(), trip.end());
    // Express rho relative to the data weight: rho = 1 balances (2/n) against
    // the median diagonal of K.
    std::vector<double> dk(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) dk[static_cast<std::size_t>(i)] = laplacian_.coeff(i, i);
    std::nth_element(dk.begin(), dk.begin() + m_ / 2, dk.end());
    const double kappa = (2.0 / static_cast<double>(n_)) / dk[static_cast<std::size_t>(m_ / 2)];
    laplacian_ *= kappa;
    for (auto& p : pen_) p *= kappa;
    std::vector<Eigen::Triplet<double>> diag;
    for (Eigen::Index i = 0; i < n_; ++i) diag.emplace_back(i, i, 2.0 / static_cast<double>(n_));
    data_weight_.resize(m_, m_);
    data_weight_.setFromTriplets(diag.begin(), diag.end());
    const Eigen::SparseMatrix<double> pattern = data_weight_ + laplacian_;
    chol_.analyzePattern(pattern);
  }

  void factorize() {
    const Eigen::SparseMatrix<double> normal = data_weight_ + rho_ * laplacian_;
    chol_.factorize(normal);
    if (chol_.info() != Eigen::Success) {
      throw SingularSystem("admm: normal matrix is numerically singular");
    }
  }

  std::shared_ptr<const SimplicialPartition> partition_;
  AdmmConfig cfg_;
  int d_ = 0;
  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
  double radius_ = 1.0;
  std::vector<Mat> inv_;
  Eigen::MatrixXd data_t_;  // m x d, zero beyond n
  Eigen::MatrixXd y_t_;     // m x d
  std::vector<Mat> u_, u_prev_, lam_, ly_, lhat_;
  std::vector<double> pen_;  // per-simplex penalty, relative to rho
  Eigen::SparseMatrix<double> laplacian_;
  Eigen::SparseMatrix<double> data_weight_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol_;
  double rho_ = 1.0;
  int iteration_ = 0;
  double primal_ = 0.0;
  double dual_ = 0.0;
  double last_rhs_norm_ = 0.0;
  ConvergenceLog log_;
};

inline TrainResult admm_train(const TrainingSet& ts, std::shared_ptr<const SimplicialPartition> partition,
                              const AdmmConfig& cfg, const Eigen::MatrixXd* initial_values = nullptr) {
  if (partition->dim() == 2) return AdmmSolver<2>(ts, std::move(partition), cfg, initial_values).run();
  return AdmmSolver<Eigen::Dynamic>(ts, std::move(partition), cfg, initial_values).run();
}

}  // namespace fnelearn

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "fnelearn/errors.hpp"

namespace fnelearn::pnp {

using Vec = Eigen::VectorXd;
using Map = std::function<Vec(const Vec&)>;

// Firmly nonexpansive plug-in T.
struct PlugIn {
  Map apply;
};

// beta-cocoercive forward operator A1.
struct CocoerciveMap {
  Map apply;
  double beta = 1.0;
};

// (x, tau) -> J_{tau A1}(x).
struct Resolvent {
  std::function<Vec(const Vec&, double)> apply;
};

struct LinearOperator {
  Map apply;
  Map adjoint;
  double norm_bound = 1.0;
  Eigen::Index domain_dim = 0;
};

inline LinearOperator identity_operator(Eigen::Index dim) {
  return {[](const Vec& x) { return x; }, [](const Vec& x) { return x; }, 1.0, dim};
}

// Power iteration on L*L; returns the estimate of ||L||.
inline double estimate_norm(const LinearOperator& l, int iters = 50, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec x(l.domain_dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
  x.normalize();
  double est = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vec y = l.adjoint(l.apply(x));
    const double n = y.norm();
    if (n == 0.0) return 0.0;
    est = std::sqrt(n);
    x = y / n;
  }
  return est;
}

// The declared bound must not undershoot the power-iteration estimate by
// more than 1%.
inline void validate_norm_bound(const LinearOperator& l) {
  if (!(l.norm_bound > 0.0)) throw InvalidHandle("linear operator: norm bound must be positive");
  if (l.domain_dim <= 0) throw InvalidHandle("linear operator: unknown domain dimension");
  const double est = estimate_norm(l);
  if (est > 1.01 * l.norm_bound) {
    throw InvalidHandle("linear operator: declared norm bound " + std::to_string(l.norm_bound) +
                        " below power-iteration estimate " + std::to_string(est));
  }
}

struct PnPConfig {
  double tau = 1.0;
  double sigma = 1.0;
  int max_iters = 1000;
  double tol = 1e-8;
  bool record_residuals = true;
};

struct HistoryRow {
  long iter = 0;
  double fp_residual = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

// Dense up to kDenseLimit rows, then every 10th iteration.
struct History {
  static constexpr long kDenseLimit = 100000;
  std::vector<HistoryRow> rows;
  bool primal_dual = false;

  void record(const HistoryRow& r) {
    if (r.iter <= kDenseLimit || r.iter % 10 == 0) rows.push_back(r);
  }

  void write_csv(std::ostream& os) const {
    os.precision(17);
    if (primal_dual) {
      os << "iter,primal_residual,dual_residual\n";
      for (const auto& r : rows) os << r.iter << ',' << r.primal_residual << ',' << r.dual_residual << '\n';
    } else {
      os << "iter,fp_residual\n";
      for (const auto& r : rows) os << r.iter << ',' << r.fp_residual << '\n';
    }
  }
};

struct FbsResult {
  Vec x;
  History history;
  int iterations = 0;
  bool converged = false;
};

// x <- T(x - tau A1 x); admissible for tau in (0, 2 beta).
inline FbsResult pnp_fbs(const CocoerciveMap& a1, const PlugIn& t, const PnPConfig& cfg, Vec x0) {
  if (!(a1.beta > 0.0)) throw InvalidHandle("pnp_fbs: cocoercivity constant must be positive");
  if (!(cfg.tau > 0.0) || cfg.tau >= 2.0 * a1.beta) {
    throw StepSizeViolation("pnp_fbs: tau = " + std::to_string(cfg.tau) + " outside (0, 2 beta) with beta = " +
                            std::to_string(a1.beta));
  }
  FbsResult r;
  r.x = std::move(x0);
  for (int k = 1; k <= cfg.max_iters; ++k) {
    Vec next = t.apply(r.x - cfg.tau * a1.apply(r.x));
    const double res = (next - r.x).norm();
    const double scale = 1.0 + r.x.norm();
    r.x = std::move(next);
    r.iterations = k;
    if (cfg.record_residuals) r.history.record({k, res, 0.0, 0.0});
    if (res <= cfg.tol * scale) {
      r.converged = true;
      break;
    }
  }
  return r;
}

struct DrResult {
  Vec x1, x2, w;
  History history;
  int iterations = 0;
  bool converged = false;
};

// x1 = J(w), x2 = T(2 x1 - w), w <- w + x2 - x1.
inline DrResult pnp_dr(const Resolvent& j, const PlugIn& t, const PnPConfig& cfg, Vec w0) {
  if (!(cfg.tau > 0.0)) throw StepSizeViolation("pnp_dr: tau must be positive");
  DrResult r;
  r.w = std::move(w0);
  for (int k = 1; k <= cfg.max_iters; ++k) {
    r.x1 = j.apply(r.w, cfg.tau);
    r.x2 = t.apply(2.0 * r.x1 - r.w);
    r.w += r.x2 - r.x1;
    const double gap = (r.x2 - r.x1).norm();
    r.iterations = k;
    if (cfg.record_residuals) r.history.record({k, gap, 0.0, 0.0});
    if (gap <= cfg.tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

struct CpResult {
  Vec x, y;
  History history;
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

inline void check_cp_steps(double tau, double sigma, double norm_bound) {
  if (!(tau > 0.0) || !(sigma > 0.0)) throw StepSizeViolation("pnp_cp: tau and sigma must be positive");
  const double c = tau * sigma * norm_bound * norm_bound;
  if (c > 1.0 + 1e-12) {
    throw StepSizeViolation("pnp_cp: tau sigma ||L||^2 = " + std::to_string(c) + " exceeds 1");
  }
}

// x+ = J_{tau A1}(x - tau L* y),  y+ = sigma (Id - T)(y / sigma + L(2 x+ - x)).
inline CpResult pnp_cp(const Resolvent& j, const PlugIn& t, const LinearOperator& l, const PnPConfig& cfg, Vec x0,
                       Vec y0) {
  check_cp_steps(cfg.tau, cfg.sigma, l.norm_bound);
  CpResult r;
  r.history.primal_dual = true;
  r.x = std::move(x0);
  r.y = std::move(y0);
  for (int k = 1; k <= cfg.max_iters; ++k) {
    Vec xn = j.apply(r.x - cfg.tau * l.adjoint(r.y), cfg.tau);
    Vec z = r.y / cfg.sigma + l.apply(2.0 * xn - r.x);
    Vec yn = cfg.sigma * (z - t.apply(z));
    const Vec dx = r.x - xn, dy = r.y - yn;
    r.primal_residual = (dx / cfg.tau - l.adjoint(dy)).norm();
    r.dual_residual = (dy / cfg.sigma - l.apply(dx)).norm();
    r.x = std::move(xn);
    r.y = std::move(yn);
    r.iterations = k;
    if (cfg.record_residuals) r.history.record({k, 0.0, r.primal_residual, r.dual_residual});
    if (r.primal_residual <= cfg.tol && r.dual_residual <= cfg.tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

// Closed-form resolvents of a maximal monotone A and of its inverse:
// resolvent(x, g) = J_{gA}(x), inverse_resolvent(x, g) = J_{gA^{-1}}(x).
struct ResolventPair {
  std::function<Vec(const Vec&, double)> resolvent;
  std::function<Vec(const Vec&, double)> inverse_resolvent;
};

// A = subdifferential of ||.||_1: soft-threshold / clip to [-1, 1].
inline ResolventPair l1_pair() {
  return {[](const Vec& x, double g) {
            return Vec(x.array().sign() * (x.array().abs() - g).max(0.0));
          },
          [](const Vec& x, double) { return Vec(x.cwiseMax(-1.0).cwiseMin(1.0)); }};
}

// A = gradient of (1/2)||.||^2 = Id, which is its own inverse.
inline ResolventPair quadratic_pair() {
  auto f = [](const Vec& x, double g) { return Vec(x / (1.0 + g)); };
  return {f, f};
}

// max_x || J_{sigma A^{-1}}(x) - sigma (Id - J_{A / sigma})(x / sigma) ||.
inline double moreau_check(const ResolventPair& pair, double sigma, const std::vector<Vec>& samples) {
  double worst = 0.0;
  for (const auto& x : samples) {
    const Vec lhs = pair.inverse_resolvent(x, sigma);
    const Vec s = x / sigma;
    const Vec rhs = sigma * (s - pair.resolvent(s, 1.0 / sigma));
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

}  // namespace fnelearn::pnp

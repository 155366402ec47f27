#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <string>

#include "fnelearn/errors.hpp"
#include "fnelearn/imaging/gradient.hpp"
#include "fnelearn/imaging/image.hpp"
#include "fnelearn/imaging/prox.hpp"
#include "fnelearn/pnp.hpp"

namespace fnelearn {

struct DenoiseConfig {
  double tau = 1.0 / std::sqrt(8.0);
  double sigma = 1.0 / std::sqrt(8.0);
  int max_iters = 5000;
  double tol = 1e-4;
  bool record_residuals = true;
};

struct DenoiseResult {
  Image image;
  pnp::History history;
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

inline void check_denoise_steps(const DenoiseConfig& cfg) {
  pnp::check_cp_steps(cfg.tau, cfg.sigma, std::sqrt(kGradientNormSquaredBound));
}

// Per-pixel plug-in acting on a gradient 2-vector.
using PixelMap = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;

// u+ = (u - tau D*v + tau f) / (1 + tau),  z = v + sigma D(2u+ - u),
// v+ = sigma (Id - T)(z / sigma) pixelwise. Starts from u = f, v = 0.
template <class T>
DenoiseResult denoise_pnp_with(const Image& noisy, const T& tr, const DenoiseConfig& cfg) {
  check_denoise_steps(cfg);
  const auto p = noisy.rows(), q = noisy.cols();
  const double tau = cfg.tau, sigma = cfg.sigma;
  DenoiseResult r;
  r.history.primal_dual = true;
  Image u = noisy;
  GradientField v(p, q);
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Image dtv = gradient_adjoint(v, p, q);
    Image un((u.pixels - tau * dtv.pixels + tau * noisy.pixels) / (1.0 + tau));
    Image bar(2.0 * un.pixels - u.pixels);
    GradientField z = gradient(bar);
    z.dx = v.dx + sigma * z.dx;
    z.dy = v.dy + sigma * z.dy;
    GradientField vn(p, q);
    for (Eigen::Index j = 0; j < q; ++j) {
      for (Eigen::Index i = 0; i < p; ++i) {
        const Eigen::Vector2d s(z.dx(i, j) / sigma, z.dy(i, j) / sigma);
        const Eigen::Vector2d t = tr(s);
        vn.dx(i, j) = sigma * (s.x() - t.x());
        vn.dy(i, j) = sigma * (s.y() - t.y());
      }
    }
    // Residuals as in the generic primal-dual driver.
    Image du(u.pixels - un.pixels);
    GradientField dv(v.dx - vn.dx, v.dy - vn.dy);
    const Image ddv = gradient_adjoint(dv, p, q);
    r.primal_residual = (du.pixels / tau - ddv.pixels).norm();
    const GradientField gdu = gradient(du);
    r.dual_residual = std::sqrt((dv.dx / sigma - gdu.dx).squaredNorm() + (dv.dy / sigma - gdu.dy).squaredNorm());
    u = std::move(un);
    v = std::move(vn);
    r.iterations = k;
    if (cfg.record_residuals) r.history.record({k, 0.0, r.primal_residual, r.dual_residual});
    if (r.primal_residual <= cfg.tol && r.dual_residual <= cfg.tol) {
      r.converged = true;
      break;
    }
  }
  r.image = std::move(u);
  return r;
}

inline DenoiseResult denoise_pnp(const Image& noisy, const PixelMap& tr, const DenoiseConfig& cfg) {
  return denoise_pnp_with(noisy, tr, cfg);
}

// Flattening used to hand images to the generic drivers: pixels column-major,
// then the gradient as [dx; dy].
inline pnp::LinearOperator gradient_operator(Eigen::Index p, Eigen::Index q) {
  pnp::LinearOperator l;
  l.domain_dim = p * q;
  l.norm_bound = std::sqrt(kGradientNormSquaredBound);
  l.apply = [p, q](const pnp::Vec& x) {
    const Image u(Eigen::Map<const Eigen::MatrixXd>(x.data(), p, q));
    const GradientField g = gradient(u);
    pnp::Vec out(2 * p * q);
    Eigen::Map<Eigen::MatrixXd>(out.data(), p, q) = g.dx;
    Eigen::Map<Eigen::MatrixXd>(out.data() + p * q, p, q) = g.dy;
    return out;
  };
  l.adjoint = [p, q](const pnp::Vec& y) {
    GradientField g(Eigen::Map<const Eigen::MatrixXd>(y.data(), p, q),
                    Eigen::Map<const Eigen::MatrixXd>(y.data() + p * q, p, q));
    const Image u = gradient_adjoint(g, p, q);
    return pnp::Vec(Eigen::Map<const pnp::Vec>(u.pixels.data(), p * q));
  };
  return l;
}

// Classical primal-dual solve of (1/2)||u - f||^2 + R(Du) through the generic
// driver, with T the prox of sigma^{-1} r applied per pixel.
inline DenoiseResult denoise_variational(const Image& noisy, Regularizer reg, double alpha, const DenoiseConfig& cfg) {
  if (!(alpha >= 0.0)) throw InvalidConfig("denoise: alpha must be >= 0");
  check_denoise_steps(cfg);
  const auto p = noisy.rows(), q = noisy.cols();
  const auto npx = p * q;
  const pnp::Vec f = Eigen::Map<const pnp::Vec>(noisy.pixels.data(), npx);
  pnp::Resolvent j{[f](const pnp::Vec& w, double tau) { return pnp::Vec((w + tau * f) / (1.0 + tau)); }};
  const double sigma = cfg.sigma;
  pnp::PlugIn t{[reg, alpha, sigma, npx](const pnp::Vec& s) {
    pnp::Vec out(s.size());
    for (Eigen::Index i = 0; i < npx; ++i) {
      const Eigen::Vector2d r = prox_of(reg, Eigen::Vector2d(s(i), s(i + npx)), alpha, sigma);
      out(i) = r.x();
      out(i + npx) = r.y();
    }
    return out;
  }};
  pnp::PnPConfig pc{cfg.tau, cfg.sigma, cfg.max_iters, cfg.tol, cfg.record_residuals};
  auto cp = pnp::pnp_cp(j, t, gradient_operator(p, q), pc, f, pnp::Vec::Zero(2 * npx));
  DenoiseResult r;
  r.image = Image(Eigen::Map<const Eigen::MatrixXd>(cp.x.data(), p, q));
  r.history = std::move(cp.history);
  r.iterations = cp.iterations;
  r.converged = cp.converged;
  r.primal_residual = cp.primal_residual;
  r.dual_residual = cp.dual_residual;
  return r;
}

}  // namespace fnelearn

#include <CLI11.hpp>

#include <iostream>

#include "fnelearn/cli/commands.hpp"

using namespace fnelearn;

namespace {

template <class T>
void set_if(CLI::Option* opt, std::optional<T>& dst, const T& v) {
  if (opt->count() > 0) dst = v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn firmly nonexpansive piecewise-affine operators and plug them into image denoising."};
  app.require_subcommand(1);

  cli::BuildTrainsetOptions bt;
  auto* c_bt = app.add_subcommand("build-trainset", "Cluster noisy/clean gradient pairs into a training set");
  c_bt->add_option("--images", bt.images, "PGM/PNG files, or builtin:circles / builtin:shapes")
      ->default_str("builtin:shapes");
  c_bt->add_option("--eta-tilde", bt.eta_tilde, "Std. dev. of the gradient noise")->capture_default_str();
  c_bt->add_option("--clusters", bt.clusters, "k-means clusters; 4 pairs per cluster after symmetrization")
      ->capture_default_str();
  c_bt->add_option("--seed", bt.seed, "RNG seed")->capture_default_str();
  c_bt->add_option("--out", bt.out, "Output directory")->required();

  cli::TrainOptions tr;
  double tr_eps = 0, tr_rho0 = 0, tr_tol = 0;
  int tr_iters = 0;
  auto* c_tr = app.add_subcommand("train", "Fit a nonexpansive operator to a training set by ADMM");
  c_tr->add_option("--trainset", tr.trainset, "Training set JSON")->required();
  c_tr->add_option("--config", tr.config, "JSON file with ADMM settings; flags override it");
  auto* o_eps = c_tr->add_option("--epsilon", tr_eps, "Lipschitz margin: per-simplex norm <= 1 - epsilon (0.01)");
  auto* o_rho = c_tr->add_option("--rho0", tr_rho0, "Initial relative penalty (1)");
  auto* o_tol = c_tr->add_option("--tol", tr_tol, "Primal and dual residual tolerance (1e-6)");
  auto* o_it = c_tr->add_option("--max-iters", tr_iters, "Iteration cap (20000)");
  c_tr->add_option("--out", tr.out, "Output directory")->required();

  cli::DenoiseOptions dn;
  double dn_sigma = 0, dn_tau = 0;
  auto* c_dn = app.add_subcommand("denoise", "Primal-dual denoising with a learned operator or a classical prox");
  c_dn->add_option("--image", dn.image, "Input PGM/PNG, or builtin:circles / builtin:shapes")->required();
  c_dn->add_option("--clean", dn.clean, "Clean reference for PSNR/SSIM (defaults to --image with --noise-eta)");
  auto* o_op = c_dn->add_option("--operator", dn.op, "Learned operator JSON");
  auto* o_me = c_dn->add_option("--method", dn.method, "Classical regularizer")
                   ->check(CLI::IsMember({"h1", "tv-aniso", "tv-iso"}));
  o_op->excludes(o_me);
  c_dn->add_option("--alpha", dn.alpha, "Regularization weight for --method")->capture_default_str();
  auto* o_sg = c_dn->add_option("--sigma", dn_sigma, "Dual step (3 with --operator, 1/sqrt(8) otherwise)");
  auto* o_ta = c_dn->add_option("--tau", dn_tau, "Primal step (1/(8 sigma)); tau sigma 8 <= 1 is required");
  c_dn->add_option("--noise-eta", dn.noise_eta, "Add N(0, eta^2) noise to --image first")->capture_default_str();
  c_dn->add_option("--seed", dn.seed, "Noise seed")->capture_default_str();
  c_dn->add_option("--max-iters", dn.max_iters, "Iteration cap")->capture_default_str();
  c_dn->add_option("--tol", dn.tol, "Residual tolerance")->capture_default_str();
  c_dn->add_option("--out", dn.out, "Output directory")->required();

  cli::RefineOptions rf;
  auto* c_rf = app.add_subcommand("refine-study", "Train on successive longest-edge bisections");
  c_rf->add_option("--trainset", rf.trainset, "Training set JSON")->required();
  c_rf->add_option("--sweeps", rf.sweeps, "Refinement levels after the Delaunay one")
      ->check(CLI::Range(0, cli::kMaxSweeps))
      ->capture_default_str();
  c_rf->add_option("--epsilon", rf.epsilon, "Lipschitz margin")->capture_default_str();
  c_rf->add_option("--tol", rf.tol, "ADMM tolerance per level")->capture_default_str();
  c_rf->add_option("--max-iters", rf.max_iters, "ADMM iteration cap per level")->capture_default_str();
  c_rf->add_option("--out", rf.out, "Output directory")->required();

  cli::AuditOptions au;
  auto* c_au = app.add_subcommand("audit", "Per-simplex Lipschitz audit; exit 1 if any exceeds 1 + tol");
  c_au->add_option("--operator", au.op, "Operator JSON")->required();
  c_au->add_option("--tol", au.tol, "Slack above 1")->capture_default_str();
  c_au->add_option("--worst", au.worst, "Offending simplices to list")->capture_default_str();

  cli::ValidateOptions va;
  auto* c_va = app.add_subcommand("validate", "Check a partition (or operator) file for P1-P3");
  c_va->add_option("--partition", va.partition, "Partition or operator JSON")->required();

  cli::GenImageOptions gi;
  auto* c_gi = app.add_subcommand("gen-image", "Write a procedural test image as PGM");
  c_gi->add_option("--name", gi.name, "circles or shapes")
      ->check(CLI::IsMember({"circles", "shapes"}))
      ->capture_default_str();
  c_gi->add_option("--size", gi.size, "Side length in pixels")->capture_default_str();
  c_gi->add_option("--out", gi.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kBadConfig;
  }

  try {
    if (*c_bt) return cli::run_build_trainset(bt, std::cout);
    if (*c_tr) {
      set_if(o_eps, tr.epsilon, tr_eps);
      set_if(o_rho, tr.rho0, tr_rho0);
      set_if(o_tol, tr.tol, tr_tol);
      set_if(o_it, tr.max_iters, tr_iters);
      return cli::run_train(tr, std::cout);
    }
    if (*c_dn) {
      set_if(o_sg, dn.sigma, dn_sigma);
      set_if(o_ta, dn.tau, dn_tau);
      return cli::run_denoise(dn, std::cout);
    }
    if (*c_rf) return cli::run_refine_study(rf, std::cout);
    if (*c_au) return cli::run_audit(au, std::cout);
    if (*c_va) return cli::run_validate(va, std::cout);
    if (*c_gi) return cli::run_gen_image(gi, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
  return cli::kBadConfig;
}

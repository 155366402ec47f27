#pragma once

// Batch commands behind the fnelearn binary. Each run_* takes parsed options,
// writes its artifacts under opts.out and returns the process exit code;
// errors escape as exceptions and are mapped by exit_code_for().

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/geometry.hpp"
#include "fnelearn/imaging.hpp"
#include "fnelearn/io.hpp"
#include "fnelearn/learn.hpp"
#include "fnelearn/paop.hpp"

namespace fnelearn::cli {

enum Exit : int { kOk = 0, kCheckFailed = 1, kNotConverged = 2, kBadConfig = 3, kIo = 4 };

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const InvalidConfig*>(&e) || dynamic_cast<const StepSizeViolation*>(&e) ||
      dynamic_cast<const ScaleExceeded*>(&e)) {
    return kBadConfig;
  }
  // Remaining library errors are bad inputs (degenerate data, shape mismatch).
  return kCheckFailed;
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::filesystem::path prepare_out(const std::string& out) {
  if (out.empty()) throw InvalidConfig("--out is required");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) throw IoError("cannot create output directory " + out);
  return out;
}

inline std::string lower_ext(const std::string& path) {
  std::string e = std::filesystem::path(path).extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e;
}

template <class Write>
void write_stream_file(const std::filesystem::path& path, Write&& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot create " + path.string());
  w(os);
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace detail

inline constexpr const char* kBuiltinPrefix = "builtin:";

// "builtin:circles" / "builtin:shapes" name the procedural test images
// (256 x 256); anything else is a file, PNG by extension, PGM otherwise.
inline Image load_image(const std::string& spec) {
  if (spec.rfind(kBuiltinPrefix, 0) == 0) return named_test_image(spec.substr(std::string(kBuiltinPrefix).size()));
  if (detail::lower_ext(spec) == ".png") return read_png(spec);
  return read_pgm(spec);
}

// ---- build-trainset ----

struct BuildTrainsetOptions {
  std::vector<std::string> images{std::string(kBuiltinPrefix) + "shapes"};
  double eta_tilde = 10.0;
  int clusters = 250;
  std::uint64_t seed = 0;
  std::string out;
};

inline int run_build_trainset(const BuildTrainsetOptions& o, std::ostream& log) {
  detail::Stopwatch clock;
  const auto dir = detail::prepare_out(o.out);
  if (o.images.empty()) throw InvalidConfig("build-trainset: no images");
  std::vector<Image> imgs;
  io::RunManifest m;
  for (const auto& s : o.images) {
    imgs.push_back(load_image(s));
    if (s.rfind(kBuiltinPrefix, 0) != 0) m.add_input(s);
  }
  TrainingBuildConfig cfg;
  cfg.eta_tilde = o.eta_tilde;
  cfg.n_clusters = o.clusters;
  cfg.seed = o.seed;
  const TrainingSet ts = build_training_set(imgs, cfg);

  io::json j = io::trainset_to_json(ts);
  j["meta"] = {{"eta_tilde", o.eta_tilde}, {"clusters", o.clusters}, {"seed", o.seed}};
  const auto path = (dir / "trainset.json").string();
  io::write_json_file(path, j);

  m.command = "build-trainset";
  m.config = {{"images", o.images}, {"eta_tilde", o.eta_tilde}, {"clusters", o.clusters}};
  m.seed = o.seed;
  m.add_output(path);
  m.seconds = clock.seconds();
  m.write((dir / "manifest.json").string());
  log << "wrote " << ts.size() << " pairs to " << path << '\n';
  return kOk;
}

// ---- train ----

struct TrainOptions {
  std::string trainset;
  std::string config;  // optional JSON with AdmmConfig field names
  std::optional<double> epsilon;
  std::optional<double> rho0;
  std::optional<double> tol;
  std::optional<int> max_iters;
  std::string out;
};

// Config file first, explicit flags on top.
inline AdmmConfig resolve_admm_config(const TrainOptions& o) {
  AdmmConfig c;
  if (!o.config.empty()) c = io::admm_config_from_json(io::read_json_file(o.config), c);
  if (o.epsilon) c.epsilon_margin = *o.epsilon;
  if (o.rho0) c.rho0 = *o.rho0;
  if (o.tol) c.tol_primal = c.tol_dual = *o.tol;
  if (o.max_iters) c.max_iters = *o.max_iters;
  if (c.rho_max < c.rho0) c.rho_max = c.rho0;
  c.validate();
  return c;
}

inline OperatorMeta meta_of_trainset(const io::json& j, const AdmmConfig& c) {
  OperatorMeta meta;
  meta.epsilon_margin = c.epsilon_margin;
  if (j.contains("meta") && j["meta"].is_object()) {
    meta.training_noise = j["meta"].value("eta_tilde", 0.0);
    meta.seed = j["meta"].value("seed", std::uint64_t{0});
  }
  return meta;
}

inline int run_train(const TrainOptions& o, std::ostream& log) {
  detail::Stopwatch clock;
  const auto dir = detail::prepare_out(o.out);
  const AdmmConfig cfg = resolve_admm_config(o);
  const io::json tj = io::read_json_file(o.trainset);
  const TrainingSet ts = io::trainset_from_json(tj);
  auto p = std::make_shared<const SimplicialPartition>(delaunay_triangulate(ts.input_nodes()));
  TrainResult r = admm_train(ts, p, cfg);
  auto op = std::make_shared<PiecewiseAffineOperator>(p, r.op->values(), meta_of_trainset(tj, cfg));
  const double risk = empirical_risk(*op, ts);
  const auto audit = lipschitz_audit(*op);

  const auto op_path = (dir / "operator.json").string();
  const auto log_path = (dir / "convergence.csv").string();
  io::write_operator(op_path, *op);
  detail::write_stream_file(log_path, [&](std::ostream& os) { r.log.write_csv(os); });

  io::RunManifest m;
  m.command = "train";
  m.config = io::admm_config_to_json(cfg);
  m.config["converged"] = r.converged;
  m.config["iterations"] = r.state.iteration;
  m.seed = op->meta().seed;
  m.add_input(o.trainset);
  if (!o.config.empty()) m.add_input(o.config);
  m.add_output(op_path);
  m.add_output(log_path);
  m.seconds = clock.seconds();
  m.write((dir / "manifest.json").string());

  log << std::setprecision(10) << "simplices " << p->size() << ", iterations " << r.state.iteration << '\n'
      << "F_hat " << risk << '\n'
      << "max_lipschitz " << audit.max << '\n';
  if (!r.converged) {
    log << "NOT CONVERGED: primal " << r.state.primal_residual << ", dual " << r.state.dual_residual
        << " after " << cfg.max_iters << " iterations (artifacts written)\n";
    return kNotConverged;
  }
  return kOk;
}

// ---- denoise ----

struct DenoiseOptions {
  std::string image;
  std::string clean;     // optional reference; defaults to --image when noise is synthesized
  std::string op;        // learned operator file
  std::string method;    // h1 | tv-aniso | tv-iso
  double alpha = 1.0;
  std::optional<double> sigma;  // default 3 for a learned operator, 1/sqrt(8) otherwise
  std::optional<double> tau;    // default 1 / (8 sigma)
  double noise_eta = 0.0;
  std::uint64_t seed = 0;
  int max_iters = 5000;
  double tol = 1e-4;
  std::string out;
};

inline constexpr double kLearnedDefaultSigma = 3.0;

inline Regularizer parse_method(const std::string& m) {
  if (m == "h1") return Regularizer::H1;
  if (m == "tv-aniso") return Regularizer::TvAniso;
  if (m == "tv-iso") return Regularizer::TvIso;
  throw InvalidConfig("unknown method '" + m + "' (expected h1, tv-aniso or tv-iso)");
}

inline int run_denoise(const DenoiseOptions& o, std::ostream& log) {
  detail::Stopwatch clock;
  if (o.op.empty() == o.method.empty()) throw InvalidConfig("denoise: give exactly one of --operator and --method");
  if (!(o.noise_eta >= 0.0)) throw InvalidConfig("denoise: --noise-eta must be >= 0");
  const bool learned = !o.op.empty();
  DenoiseConfig dc;
  dc.sigma = o.sigma.value_or(learned ? kLearnedDefaultSigma : 1.0 / std::sqrt(kGradientNormSquaredBound));
  dc.tau = o.tau.value_or(1.0 / (kGradientNormSquaredBound * dc.sigma));
  dc.max_iters = o.max_iters;
  dc.tol = o.tol;
  check_denoise_steps(dc);
  std::optional<Regularizer> reg;
  if (!learned) reg = parse_method(o.method);

  const auto dir = detail::prepare_out(o.out);
  io::RunManifest m;
  const Image input = load_image(o.image);
  if (o.image.rfind(kBuiltinPrefix, 0) != 0) m.add_input(o.image);
  std::optional<Image> clean;
  if (!o.clean.empty()) {
    clean = load_image(o.clean);
    if (o.clean.rfind(kBuiltinPrefix, 0) != 0) m.add_input(o.clean);
  } else if (o.noise_eta > 0.0) {
    clean = input;
  }
  const Image noisy = o.noise_eta > 0.0 ? add_gaussian_noise(input, o.noise_eta, o.seed) : input;
  if (clean) require_same_shape(*clean, noisy, "denoise: clean reference");

  DenoiseResult r;
  if (learned) {
    auto op = io::read_operator(o.op);
    m.add_input(o.op);
    if (op->partition().dim() != 2) throw InvalidConfig("denoise: operator must act on R^2");
    const auto t = to_firmly_nonexpansive(op, &log);
    r = denoise_pnp_with(noisy, [&t](const Eigen::Vector2d& s) { return t.apply2(s); }, dc);
  } else {
    r = denoise_variational(noisy, *reg, o.alpha, dc);
  }

  const auto out_img = (dir / "denoised.pgm").string();
  const auto res_csv = (dir / "residuals.csv").string();
  const auto met_csv = (dir / "metrics.csv").string();
  write_pgm(out_img, r.image);
  detail::write_stream_file(res_csv, [&](std::ostream& os) { r.history.write_csv(os); });
  std::vector<std::string> outputs{out_img, res_csv, met_csv};
  if (o.noise_eta > 0.0) {
    const auto noisy_img = (dir / "noisy.pgm").string();
    write_pgm(noisy_img, noisy);
    outputs.push_back(noisy_img);
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  io::MetricRow row{std::filesystem::path(o.image).filename().string(),
                    learned ? "learned" : o.method,
                    o.noise_eta,
                    dc.sigma,
                    learned ? nan : o.alpha,
                    clean ? psnr(r.image, *clean) : nan,
                    clean ? ssim(r.image, *clean) : nan,
                    r.iterations,
                    clock.seconds()};
  std::vector<io::MetricRow> rows{row};
  if (clean) {
    io::MetricRow base = row;
    base.method = "noisy";
    base.psnr = psnr(noisy, *clean);
    base.ssim = ssim(noisy, *clean);
    base.iters = 0;
    base.seconds = 0.0;
    rows.insert(rows.begin(), base);
  }
  detail::write_stream_file(met_csv, [&](std::ostream& os) { io::write_metric_csv(os, rows); });

  m.command = "denoise";
  m.config = {{"method", learned ? "learned" : o.method},
              {"alpha", o.alpha},
              {"sigma", dc.sigma},
              {"tau", dc.tau},
              {"noise_eta", o.noise_eta},
              {"max_iters", o.max_iters},
              {"tol", o.tol},
              {"converged", r.converged},
              {"iterations", r.iterations}};
  m.seed = o.seed;
  for (const auto& f : outputs) m.add_output(f);
  m.seconds = clock.seconds();
  m.write((dir / "manifest.json").string());

  log << std::setprecision(6) << "iterations " << r.iterations << ", primal " << r.primal_residual << ", dual "
      << r.dual_residual << '\n';
  if (clean) log << "psnr noisy " << rows[0].psnr << " -> " << row.psnr << ", ssim " << row.ssim << '\n';
  if (!r.converged) {
    log << "NOT CONVERGED after " << o.max_iters << " iterations (artifacts written)\n";
    return kNotConverged;
  }
  return kOk;
}

// ---- refine-study ----

struct RefineLevel {
  io::RefineRow row;
  std::shared_ptr<PiecewiseAffineOperator> op;
  bool converged = false;
  int iterations = 0;
};

inline constexpr int kMaxSweeps = 8;

// Level 0 is the Delaunay partition of the inputs; level k bisects every
// simplex of level k-1 once along its longest edge. New nodes carry
// constraints only. Each level warm-starts from the previous operator, which
// is feasible on the finer partition.
inline std::vector<RefineLevel> refine_study(const TrainingSet& ts, int sweeps, AdmmConfig cfg) {
  if (sweeps < 0 || sweeps > kMaxSweeps) {
    throw InvalidConfig("refine-study: sweeps must lie in [0, " + std::to_string(kMaxSweeps) + "]");
  }
  cfg.allow_constraint_only_nodes = true;
  std::vector<RefineLevel> out;
  auto p = std::make_shared<const SimplicialPartition>(delaunay_triangulate(ts.input_nodes()));
  std::shared_ptr<PiecewiseAffineOperator> prev;
  for (int level = 0; level <= sweeps; ++level) {
    if (level > 0) p = std::make_shared<const SimplicialPartition>(bisect_longest_edge(*p));
    TrainResult r;
    if (prev) {
      Eigen::MatrixXd warm(p->dim(), p->nodes().size());
      for (Eigen::Index i = 0; i < warm.cols(); ++i) warm.col(i) = prev->evaluate(p->nodes().point(i));
      r = admm_train(ts, p, cfg, &warm);
    } else {
      r = admm_train(ts, p, cfg);
    }
    const auto pm = partition_metrics(*p);
    RefineLevel lv;
    lv.op = r.op;
    lv.converged = r.converged;
    lv.iterations = r.state.iteration;
    lv.row = {level, pm.longest_edge, pm.min_measure, empirical_risk(*r.op, ts), lipschitz_audit(*r.op).max};
    out.push_back(lv);
    prev = r.op;
  }
  return out;
}

struct RefineOptions {
  std::string trainset;
  int sweeps = 5;
  double epsilon = 0.01;
  // Tight by default: level-to-level risk differences are compared at 1e-8.
  double tol = 1e-10;
  int max_iters = 200000;
  std::string out;
};

inline int run_refine_study(const RefineOptions& o, std::ostream& log) {
  detail::Stopwatch clock;
  AdmmConfig cfg;
  cfg.epsilon_margin = o.epsilon;
  cfg.tol_primal = cfg.tol_dual = o.tol;
  cfg.max_iters = o.max_iters;
  cfg.validate();
  if (o.sweeps < 0 || o.sweeps > kMaxSweeps) throw InvalidConfig("refine-study: --sweeps must lie in [0, 8]");
  const auto dir = detail::prepare_out(o.out);
  const TrainingSet ts = io::read_trainset(o.trainset);
  const auto levels = refine_study(ts, o.sweeps, cfg);
  std::vector<io::RefineRow> rows;
  bool all = true;
  for (const auto& lv : levels) {
    rows.push_back(lv.row);
    all = all && lv.converged;
    log << std::setprecision(10) << "level " << lv.row.level << ": simplices " << lv.op->partition().size()
        << ", F_hat " << lv.row.risk << ", max_lipschitz " << lv.row.max_lipschitz
        << (lv.converged ? "" : " (not converged)") << '\n';
  }
  const auto csv = (dir / "refine.csv").string();
  detail::write_stream_file(csv, [&](std::ostream& os) { io::write_refine_csv(os, rows); });
  io::RunManifest m;
  m.command = "refine-study";
  m.config = io::admm_config_to_json(cfg);
  m.config["sweeps"] = o.sweeps;
  m.add_input(o.trainset);
  m.add_output(csv);
  m.seconds = clock.seconds();
  m.write((dir / "manifest.json").string());
  return all ? kOk : kNotConverged;
}

// ---- audit / validate ----

struct AuditOptions {
  std::string op;
  double tol = 1e-6;
  int worst = 10;
};

inline int run_audit(const AuditOptions& o, std::ostream& log) {
  const auto op = io::read_operator(o.op);
  const auto a = lipschitz_audit(*op);
  const double limit = 1.0 + o.tol;
  const double edges[] = {0.5, 0.9, 0.99, 1.0, limit};
  std::vector<int> hist(std::size(edges) + 1, 0);
  for (double v : a.per_simplex) {
    std::size_t b = 0;
    while (b < std::size(edges) && v > edges[b]) ++b;
    ++hist[b];
  }
  log << std::setprecision(10) << "simplices " << a.per_simplex.size() << ", max_lipschitz " << a.max
      << " (simplex " << a.argmax_simplex << ")\n";
  const char* labels[] = {"[0, 0.5]", "(0.5, 0.9]", "(0.9, 0.99]", "(0.99, 1]", "(1, 1+tol]", "> 1+tol"};
  for (std::size_t b = 0; b < hist.size(); ++b) log << "  " << std::left << std::setw(12) << labels[b] << hist[b] << '\n';
  std::vector<int> order(a.per_simplex.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a.per_simplex[x] > a.per_simplex[y]; });
  const bool pass = a.max <= limit;
  if (!pass) {
    log << "FAIL: simplices above " << limit << ":\n";
    for (std::size_t i = 0; i < order.size() && static_cast<int>(i) < o.worst; ++i) {
      const int t = order[i];
      if (a.per_simplex[t] <= limit) break;
      log << "  simplex " << t << "  lipschitz " << a.per_simplex[t] << '\n';
    }
    return kCheckFailed;
  }
  log << "pass\n";
  return kOk;
}

struct ValidateOptions {
  std::string partition;
};

// Operator files are partitions with extra fields, so either is accepted.
inline int run_validate(const ValidateOptions& o, std::ostream& log) {
  const auto p = io::read_partition(o.partition);
  const auto rep = validate_partition(p);
  log << rep.summary();
  return rep.ok() ? kOk : kCheckFailed;
}

// ---- gen-image ----

struct GenImageOptions {
  std::string name = "circles";
  int size = 256;
  std::string out;
};

inline int run_gen_image(const GenImageOptions& o, std::ostream& log) {
  detail::Stopwatch clock;
  if (o.size < 2) throw InvalidConfig("gen-image: --size must be >= 2");
  const Image img = named_test_image(o.name, o.size);
  const auto dir = detail::prepare_out(o.out);
  const auto path = (dir / (o.name + ".pgm")).string();
  write_pgm(path, img);
  io::RunManifest m;
  m.command = "gen-image";
  m.config = {{"name", o.name}, {"size", o.size}};
  m.add_output(path);
  m.seconds = clock.seconds();
  m.write((dir / "manifest.json").string());
  log << "wrote " << path << '\n';
  return kOk;
}

}  // namespace fnelearn::cli

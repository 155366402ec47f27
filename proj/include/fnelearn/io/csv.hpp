#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <vector>

namespace fnelearn::io {

// Shortest decimal that reads back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct MetricRow {
  std::string image;
  std::string method;
  double eta = 0.0;
  double sigma = 0.0;
  double alpha = 0.0;
  double psnr = 0.0;  // NaN when no clean reference was available
  double ssim = 0.0;
  int iters = 0;
  double seconds = 0.0;
};

inline void write_metric_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
  os << "image,method,eta,sigma,alpha,psnr,ssim,iters,seconds\n";
  for (const auto& r : rows) {
    os << r.image << ',' << r.method << ',' << fmt(r.eta) << ',' << fmt(r.sigma) << ',' << fmt(r.alpha) << ','
       << fmt(r.psnr) << ',' << fmt(r.ssim) << ',' << r.iters << ',' << fmt(r.seconds) << '\n';
  }
}

struct RefineRow {
  int level = 0;
  double longest_edge = 0.0;
  double min_measure = 0.0;
  double risk = 0.0;
  double max_lipschitz = 0.0;
};

inline void write_refine_csv(std::ostream& os, const std::vector<RefineRow>& rows) {
  os << "level,longest_edge,min_measure,F_hat,max_lipschitz\n";
  for (const auto& r : rows) {
    os << r.level << ',' << fmt(r.longest_edge) << ',' << fmt(r.min_measure) << ',' << fmt(r.risk) << ','
       << fmt(r.max_lipschitz) << '\n';
  }
}

}  // namespace fnelearn::io

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/imaging/image.hpp"

namespace fnelearn {

namespace detail {

inline void skip_pnm_space(std::istream& in) {
  while (in) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
}

inline long read_pnm_int(std::istream& in) {
  skip_pnm_space(in);
  long v = -1;
  if (!(in >> v) || v < 0) throw IoError("pgm: malformed header");
  return v;
}

}  // namespace detail

// 8-bit binary PGM (P5). maxval must be < 256; samples are returned as-is.
inline Image read_pgm(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw IoError("pgm: not a binary P5 file");
  const long q = detail::read_pnm_int(in);
  const long p = detail::read_pnm_int(in);
  const long maxval = detail::read_pnm_int(in);
  if (p <= 0 || q <= 0) throw IoError("pgm: empty image");
  if (maxval <= 0 || maxval > 255) throw IoError("pgm: only 8-bit images are supported");
  in.get();  // single whitespace before the raster
  std::vector<unsigned char> buf(static_cast<std::size_t>(p * q));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw IoError("pgm: truncated raster");
  Image img(p, q);
  for (long i = 0; i < p; ++i)
    for (long j = 0; j < q; ++j) img(i, j) = buf[static_cast<std::size_t>(i * q + j)];
  return img;
}

inline Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("pgm: cannot open " + path);
  return read_pgm(in);
}

// Pixels are rounded and clamped to [0, 255].
inline void write_pgm(std::ostream& out, const Image& img) {
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  std::vector<unsigned char> buf(static_cast<std::size_t>(img.size()));
  for (Eigen::Index i = 0; i < img.rows(); ++i) {
    for (Eigen::Index j = 0; j < img.cols(); ++j) {
      const double v = std::clamp(std::round(img(i, j)), 0.0, 255.0);
      buf[static_cast<std::size_t>(i * img.cols() + j)] = static_cast<unsigned char>(v);
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("pgm: write failed");
}

inline void write_pgm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("pgm: cannot create " + path);
  write_pgm(out, img);
}

}  // namespace fnelearn

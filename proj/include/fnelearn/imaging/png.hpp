#pragma once

// Requires linking against libpng.

#include <png.h>

#include <string>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/imaging/image.hpp"

namespace fnelearn {

// Any PNG, converted to 8-bit grayscale by libpng.
inline Image read_png(const std::string& path) {
  png_image im{};
  im.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&im, path.c_str())) {
    throw IoError("png: cannot read " + path + ": " + im.message);
  }
  im.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(im));
  if (!png_image_finish_read(&im, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = im.message;
    png_image_free(&im);
    throw IoError("png: decode failed for " + path + ": " + msg);
  }
  Image img(im.height, im.width);
  for (png_uint_32 i = 0; i < im.height; ++i)
    for (png_uint_32 j = 0; j < im.width; ++j) img(i, j) = buf[i * im.width + j];
  return img;
}

}  // namespace fnelearn

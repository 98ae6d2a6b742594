#include "occkit/image.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "occkit/error.hpp"

namespace occ {

std::string to_string(const Dims& dims) {
  return std::to_string(dims.height) + "x" + std::to_string(dims.width) + "x" +
         std::to_string(dims.channels);
}

Dims parse_dims(const std::string& text) {
  Dims d;
  char x1 = 0, x2 = 0;
  std::istringstream in(text);
  if (!(in >> d.height >> x1 >> d.width >> x2 >> d.channels) || x1 != 'x' || x2 != 'x' ||
      !(in >> std::ws).eof()) {
    throw InvalidArgument("dims must look like HxWxC, got '" + text + "'");
  }
  if (d.height <= 0 || d.width <= 0 || d.channels <= 0) {
    throw InvalidArgument("dims must be positive, got '" + text + "'");
  }
  return d;
}

Image::Image(Dims dims, double fill) : dims_(dims), pixels_(dims.size(), fill) {}

Image::Image(Dims dims, std::vector<double> pixels) : dims_(dims), pixels_(std::move(pixels)) {
  if (pixels_.size() != dims_.size()) {
    throw DimensionError("pixel buffer of size " + std::to_string(pixels_.size()) +
                         " does not match dims " + to_string(dims_));
  }
}

double Image::mean() const {
  if (pixels_.empty()) return 0.0;
  return std::accumulate(pixels_.begin(), pixels_.end(), 0.0) / pixels_.size();
}

void check_finite(const Image& image) {
  for (double p : image.pixels()) {
    if (!std::isfinite(p)) throw InvalidArgument("image contains a non-finite pixel value");
  }
}

void check_unit_range(const Image& image) {
  for (double p : image.pixels()) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw InvalidArgument("image pixel outside [0,1]: " + std::to_string(p));
    }
  }
}

}  // namespace occ

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace occ {

struct Dims {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& dims);

// Parses "HxWxC" (e.g. "128x128x1").
Dims parse_dims(const std::string& text);

// Dense intensity grid, planar (channel-major) storage: plane c holds H*W
// row-major pixels. Intensities are expected in [0,1]; the container itself
// does not enforce the range, check_unit_range() does.
class Image {
 public:
  Image() = default;
  explicit Image(Dims dims, double fill = 0.0);
  Image(Dims dims, std::vector<double> pixels);

  const Dims& dims() const { return dims_; }
  int height() const { return dims_.height; }
  int width() const { return dims_.width; }
  int channels() const { return dims_.channels; }
  bool empty() const { return pixels_.empty(); }

  double& at(int y, int x, int c = 0) {
    return pixels_[(static_cast<std::size_t>(c) * dims_.height + y) * dims_.width + x];
  }
  double at(int y, int x, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(c) * dims_.height + y) * dims_.width + x];
  }

  std::span<double> pixels() { return pixels_; }
  std::span<const double> pixels() const { return pixels_; }

  std::span<const double> plane(int c) const {
    const std::size_t n = static_cast<std::size_t>(dims_.height) * dims_.width;
    return std::span<const double>(pixels_).subspan(c * n, n);
  }

  double mean() const;

  bool operator==(const Image&) const = default;

 private:
  Dims dims_;
  std::vector<double> pixels_;
};

// Throws InvalidArgument if any pixel is non-finite or outside [0,1].
void check_unit_range(const Image& image);

// Throws InvalidArgument if any pixel is non-finite.
void check_finite(const Image& image);

}  // namespace occ

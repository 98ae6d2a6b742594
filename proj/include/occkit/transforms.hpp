#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "occkit/image.hpp"

namespace occ {

// Affine intensity map p -> clip(contrast * p + brightness, 0, 1).
struct LinearMagnification {
  double contrast = 1.0;
  double brightness = 0.0;

  bool is_identity() const { return contrast == 1.0 && brightness == 0.0; }
  bool operator==(const LinearMagnification&) const = default;
};

// Translation by (dx, dy) pixels; +dx moves content right, +dy moves it down.
// Vacated pixels are filled with 0.
struct Shift {
  int dx = 0;
  int dy = 0;

  bool is_identity() const { return dx == 0 && dy == 0; }
  bool operator==(const Shift&) const = default;
};

// Counter-clockwise rotation by a multiple of 90 degrees.
struct Rotation {
  int degrees = 0;

  bool is_identity() const { return degrees == 0; }
  bool operator==(const Rotation&) const = default;
};

using TransformSpec = std::variant<LinearMagnification, Shift, Rotation>;

bool is_identity(const TransformSpec& spec);
bool is_geometric(const TransformSpec& spec);
std::string describe(const TransformSpec& spec);

Image apply_linear(const Image& image, const LinearMagnification& spec);
Image apply_geometric(const Image& image, const Shift& spec);
Image apply_geometric(const Image& image, const Rotation& spec);
Image apply(const Image& image, const TransformSpec& spec);

// Ordered family of transforms. specs()[i] carries class label i internally
// (0-based); reports print i + 1.
class TransformSet {
 public:
  // Validates: at least two specs, exactly one identity, and either all
  // intensity transforms or all geometric ones.
  TransformSet(std::string name, std::vector<TransformSpec> specs);

  const std::string& name() const { return name_; }
  const std::vector<TransformSpec>& specs() const { return specs_; }
  int size() const { return static_cast<int>(specs_.size()); }
  int identity_index() const { return identity_index_; }
  const TransformSpec& operator[](int i) const { return specs_.at(i); }

  bool operator==(const TransformSet&) const = default;

 private:
  std::string name_;
  std::vector<TransformSpec> specs_;
  int identity_index_ = 0;
};

// Returns the n transformed counterparts of `image`, paired with their 0-based
// labels, in set order. A failing spec is reported with its 1-based label.
std::vector<std::pair<Image, int>> expand(const Image& image, const TransformSet& set);

const std::vector<std::string>& preset_names();

// Named presets. "S(4,0)" shifts by image_side / 3 and therefore needs the
// side length of the (square) images it will be applied to.
TransformSet preset(std::string_view name, int image_side = 0);

// User-defined sets as JSON:
//   {"name": "...", "transforms": [{"kind": "linear", "c": 1.2, "b": 0.0},
//                                  {"kind": "shift", "dx": 1, "dy": 0},
//                                  {"kind": "rotation", "angle": 90}]}
TransformSet load_transform_set(const std::filesystem::path& path);
TransformSet parse_transform_set(const std::string& json_text, const std::string& source = "<string>");
std::string transform_set_to_json(const TransformSet& set);

// A preset name, or a path to a transform-set file.
TransformSet resolve_transform_set(const std::string& name_or_path, int image_side = 0);

}  // namespace occ

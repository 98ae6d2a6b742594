#include "occkit/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "occkit/error.hpp"

namespace occ {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string format_number(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

bool is_identity(const TransformSpec& spec) {
  return std::visit([](const auto& s) { return s.is_identity(); }, spec);
}

bool is_geometric(const TransformSpec& spec) {
  return !std::holds_alternative<LinearMagnification>(spec);
}

std::string describe(const TransformSpec& spec) {
  return std::visit(
      Overloaded{
          [](const LinearMagnification& s) {
            return "linear(c=" + format_number(s.contrast) + ",b=" + format_number(s.brightness) + ")";
          },
          [](const Shift& s) {
            return "shift(dx=" + std::to_string(s.dx) + ",dy=" + std::to_string(s.dy) + ")";
          },
          [](const Rotation& s) { return "rotation(" + std::to_string(s.degrees) + ")"; },
      },
      spec);
}

Image apply_linear(const Image& image, const LinearMagnification& spec) {
  if (!(spec.contrast > 0.0) || !std::isfinite(spec.contrast)) {
    throw InvalidArgument("contrast coefficient must be positive, got " + format_number(spec.contrast));
  }
  if (!std::isfinite(spec.brightness)) {
    throw InvalidArgument("brightness offset must be finite");
  }
  check_finite(image);
  Image out = image;
  if (spec.is_identity()) return out;
  for (double& p : out.pixels()) {
    p = std::clamp(spec.contrast * p + spec.brightness, 0.0, 1.0);
  }
  return out;
}

Image apply_geometric(const Image& image, const Shift& spec) {
  const int h = image.height();
  const int w = image.width();
  if (std::abs(spec.dx) >= w || std::abs(spec.dy) >= h) {
    throw InvalidArgument("shift (" + std::to_string(spec.dx) + "," + std::to_string(spec.dy) +
                          ") out of range for a " + to_string(image.dims()) + " image");
  }
  if (spec.is_identity()) return image;
  Image out(image.dims(), 0.0);
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      const int sy = y - spec.dy;
      if (sy < 0 || sy >= h) continue;
      for (int x = 0; x < w; ++x) {
        const int sx = x - spec.dx;
        if (sx < 0 || sx >= w) continue;
        out.at(y, x, c) = image.at(sy, sx, c);
      }
    }
  }
  return out;
}

Image apply_geometric(const Image& image, const Rotation& spec) {
  const int h = image.height();
  const int w = image.width();
  if (spec.degrees != 0 && spec.degrees != 90 && spec.degrees != 180 && spec.degrees != 270) {
    throw InvalidArgument("rotation angle must be one of 0, 90, 180, 270; got " +
                          std::to_string(spec.degrees));
  }
  if ((spec.degrees == 90 || spec.degrees == 270) && h != w) {
    throw InvalidArgument("right-angle rotation needs a square image, got " + to_string(image.dims()));
  }
  if (spec.is_identity()) return image;
  Image out(image.dims(), 0.0);
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double v = 0.0;
        switch (spec.degrees) {
          case 90: v = image.at(x, w - 1 - y, c); break;
          case 180: v = image.at(h - 1 - y, w - 1 - x, c); break;
          case 270: v = image.at(h - 1 - x, y, c); break;
        }
        out.at(y, x, c) = v;
      }
    }
  }
  return out;
}

Image apply(const Image& image, const TransformSpec& spec) {
  return std::visit(
      Overloaded{
          [&](const LinearMagnification& s) { return apply_linear(image, s); },
          [&](const Shift& s) { return apply_geometric(image, s); },
          [&](const Rotation& s) { return apply_geometric(image, s); },
      },
      spec);
}

TransformSet::TransformSet(std::string name, std::vector<TransformSpec> specs)
    : name_(std::move(name)), specs_(std::move(specs)) {
  if (specs_.size() < 2) {
    throw InvalidArgument("transform set '" + name_ + "' needs at least 2 transforms");
  }
  const bool geometric = is_geometric(specs_.front());
  int identities = 0;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (is_geometric(specs_[i]) != geometric) {
      throw InvalidArgument("transform set '" + name_ +
                            "' mixes intensity and geometric transforms");
    }
    if (const auto* lm = std::get_if<LinearMagnification>(&specs_[i]);
        lm && !(lm->contrast > 0.0)) {
      throw InvalidArgument("transform " + std::to_string(i + 1) + " of '" + name_ +
                            "' has non-positive contrast");
    }
    if (is_identity(specs_[i])) {
      ++identities;
      identity_index_ = static_cast<int>(i);
    }
  }
  if (identities != 1) {
    throw InvalidArgument("transform set '" + name_ + "' must contain exactly one identity, found " +
                          std::to_string(identities));
  }
}

std::vector<std::pair<Image, int>> expand(const Image& image, const TransformSet& set) {
  std::vector<std::pair<Image, int>> out;
  out.reserve(set.size());
  for (int i = 0; i < set.size(); ++i) {
    try {
      out.emplace_back(apply(image, set[i]), i);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("transform " + std::to_string(i + 1) + " (" + describe(set[i]) +
                            ") of '" + set.name() + "': " + e.what());
    }
  }
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"LM(5,0)", "S(4,0)",  "R(4,0)", "LM(5,1)",
                                                 "LM(5,2)", "LM(3,0)", "LM(7,0)"};
  return names;
}

namespace {

TransformSet linear_set(std::string_view name, std::vector<double> c, std::vector<double> b) {
  std::vector<TransformSpec> specs;
  for (std::size_t i = 0; i < c.size(); ++i) specs.emplace_back(LinearMagnification{c[i], b[i]});
  return TransformSet(std::string(name), std::move(specs));
}

std::string valid_names() {
  std::string out;
  for (const auto& n : preset_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

TransformSet preset(std::string_view name, int image_side) {
  if (name == "LM(5,0)") return linear_set(name, {0.2, 0.6, 1, 1.4, 1.8}, {0, 0, 0, 0, 0});
  if (name == "LM(5,1)") return linear_set(name, {0.6, 0.8, 1, 1.2, 1.4}, {0.2, -0.2, 0, 0.2, -0.2});
  if (name == "LM(5,2)") return linear_set(name, {0.6, 0.8, 1, 1.2, 1.4}, {0.4, -0.4, 0, 0.4, -0.4});
  if (name == "LM(3,0)") return linear_set(name, {0.8, 1, 1.2}, {-0.2, 0, 0.2});
  // Only five brightness values are published for seven contrasts; zeros
  // follow the "(7,0)" naming. Use a transform-set file for other choices.
  if (name == "LM(7,0)") return linear_set(name, {0.4, 0.6, 0.8, 1, 1.2, 1.4, 1.6}, std::vector<double>(7, 0.0));
  if (name == "R(4,0)") {
    return TransformSet(std::string(name), {Rotation{0}, Rotation{90}, Rotation{180}, Rotation{270}});
  }
  if (name == "S(4,0)") {
    if (image_side < 3) {
      throw InvalidArgument("S(4,0) needs the image side length (>= 3) to derive its h/3 shift");
    }
    const int s = image_side / 3;
    return TransformSet(std::string(name), {Shift{0, 0}, Shift{s, 0}, Shift{0, s}, Shift{s, s}});
  }
  throw InvalidArgument("unknown transform preset '" + std::string(name) + "'; valid names: " + valid_names());
}

TransformSet parse_transform_set(const std::string& json_text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, e.what());
  }
  try {
    std::vector<TransformSpec> specs;
    for (const auto& t : doc.at("transforms")) {
      const auto kind = t.at("kind").get<std::string>();
      if (kind == "linear") {
        specs.emplace_back(LinearMagnification{t.at("c").get<double>(), t.value("b", 0.0)});
      } else if (kind == "shift") {
        specs.emplace_back(Shift{t.value("dx", 0), t.value("dy", 0)});
      } else if (kind == "rotation") {
        specs.emplace_back(Rotation{t.at("angle").get<int>()});
      } else {
        throw InvalidArgument("unknown transform kind '" + kind + "' in " + source);
      }
    }
    return TransformSet(doc.value("name", std::string("custom")), std::move(specs));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 0, e.what());
  }
}

TransformSet load_transform_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transform-set file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_transform_set(buf.str(), path.string());
}

std::string transform_set_to_json(const TransformSet& set) {
  nlohmann::json doc;
  doc["name"] = set.name();
  doc["transforms"] = nlohmann::json::array();
  for (const auto& spec : set.specs()) {
    doc["transforms"].push_back(std::visit(
        Overloaded{
            [](const LinearMagnification& s) {
              return nlohmann::json{{"kind", "linear"}, {"c", s.contrast}, {"b", s.brightness}};
            },
            [](const Shift& s) { return nlohmann::json{{"kind", "shift"}, {"dx", s.dx}, {"dy", s.dy}}; },
            [](const Rotation& s) { return nlohmann::json{{"kind", "rotation"}, {"angle", s.degrees}}; },
        },
        spec));
  }
  return doc.dump(2);
}

TransformSet resolve_transform_set(const std::string& name_or_path, int image_side) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return preset(name_or_path, image_side);
  }
  if (std::filesystem::exists(name_or_path)) return load_transform_set(name_or_path);
  return preset(name_or_path, image_side);  // throws with the list of valid names
}

}  // namespace occ

#include "occkit/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "occkit/error.hpp"
#include "occkit/io_util.hpp"

namespace occ {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Rec.601 luma weights.
constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

}  // namespace

std::size_t DatasetManifest::train_pool_size() const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [](const ManifestEntry& e) { return e.split == Split::Train; }));
}

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                               const std::string& source, std::optional<Dims> dims_override,
                               bool check_files) {
  DatasetManifest m;
  m.content_hash = sha256_hex(text);
  std::optional<Dims> dims;
  bool header_seen = false;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::set<std::string> train_classes;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string body = trim(line.substr(1));
      if (body.rfind("dims:", 0) == 0) {
        try {
          dims = parse_dims(trim(body.substr(5)));
        } catch (const InvalidArgument& e) {
          throw ParseError(source, line_no, e.what());
        }
      }
      continue;
    }
    const auto fields = split_csv(line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"path", "class_id", "split"}) {
        throw ParseError(source, line_no, "expected header 'path,class_id,split'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError(source, line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError(source, line_no, "empty path or class_id");
    }
    ManifestEntry e;
    e.id = fields[0];
    e.path = std::filesystem::path(fields[0]).is_absolute() ? std::filesystem::path(fields[0])
                                                             : base_dir / fields[0];
    e.class_id = fields[1];
    if (fields[2] == "train") {
      e.split = Split::Train;
      train_classes.insert(e.class_id);
    } else if (fields[2] == "test") {
      e.split = Split::Test;
    } else {
      throw ParseError(source, line_no, "split must be 'train' or 'test', got '" + fields[2] + "'");
    }
    if (check_files && !std::filesystem::exists(e.path)) {
      throw ParseError(source, line_no, "image file not found: " + e.path.string());
    }
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw ParseError(source, line_no, "no entries");
  if (train_classes.size() != 1) {
    std::string names;
    for (const auto& c : train_classes) names += (names.empty() ? "" : ", ") + c;
    throw InvalidArgument(source + ": train split must contain exactly one class, found {" + names + "}");
  }
  m.majority_class = *train_classes.begin();
  if (dims_override) dims = dims_override;
  if (!dims) throw ParseError(source, 1, "no '# dims: HxWxC' directive and no dims supplied");
  m.target_dims = *dims;
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path, std::optional<Dims> dims_override) {
  if (!std::filesystem::exists(path)) throw IoError("manifest not found: " + path.string());
  return parse_manifest(read_file(path), path.parent_path(), path.string(), dims_override);
}

std::string manifest_to_csv(const DatasetManifest& manifest) {
  std::ostringstream out;
  out << "# dims: " << to_string(manifest.target_dims) << "\n";
  out << "path,class_id,split\n";
  for (const auto& e : manifest.entries) {
    out << e.id << "," << e.class_id << "," << (e.split == Split::Train ? "train" : "test") << "\n";
  }
  return out.str();
}

Image preprocess(const Image& raw, Dims target) {
  if (raw.height() <= 0 || raw.width() <= 0 || raw.channels() <= 0 || raw.empty()) {
    throw InvalidArgument("cannot preprocess a zero-area image");
  }
  if (target.height <= 0 || target.width <= 0 || target.channels <= 0) {
    throw InvalidArgument("invalid target dims " + to_string(target));
  }
  check_finite(raw);
  const int src_c = raw.channels();
  const int h = raw.height();
  const int w = raw.width();
  const std::size_t plane = static_cast<std::size_t>(h) * w;

  // Channel conversion at source resolution.
  std::vector<double> planes(plane * target.channels);
  auto src = raw.plane(0);
  if (src_c == target.channels || (src_c == 4 && target.channels == 3)) {
    for (int c = 0; c < target.channels; ++c) {
      src = raw.plane(c);
      std::copy(src.begin(), src.end(), planes.begin() + c * plane);
    }
  } else if (src_c == 1 || src_c == 2) {  // gray, or gray + alpha
    for (int c = 0; c < target.channels; ++c) std::copy(src.begin(), src.end(), planes.begin() + c * plane);
  } else if ((src_c == 3 || src_c == 4) && target.channels == 1) {
    auto r = raw.plane(0), g = raw.plane(1), b = raw.plane(2);
    for (std::size_t i = 0; i < plane; ++i) planes[i] = kLumaR * r[i] + kLumaG * g[i] + kLumaB * b[i];
  } else {
    throw InvalidArgument("cannot convert " + std::to_string(src_c) + " channels to " +
                          std::to_string(target.channels));
  }

  Image out(target);
  const std::size_t out_plane = static_cast<std::size_t>(target.height) * target.width;
  for (int c = 0; c < target.channels; ++c) {
    double* dst = out.pixels().data() + c * out_plane;
    if (h == target.height && w == target.width) {
      std::copy_n(planes.begin() + c * plane, plane, dst);
    } else {
      cv::Mat in_mat(h, w, CV_64F, planes.data() + c * plane);
      cv::Mat out_mat(target.height, target.width, CV_64F, dst);
      cv::resize(in_mat, out_mat, out_mat.size(), 0, 0, cv::INTER_LINEAR);
    }
  }
  for (double& p : out.pixels()) p = std::clamp(p, 0.0, 1.0);
  return out;
}

Image preprocess(const cv::Mat& raw, Dims target) {
  if (raw.empty() || raw.rows <= 0 || raw.cols <= 0) {
    throw InvalidArgument("cannot preprocess an empty or zero-area image");
  }
  double scale = 1.0;
  switch (raw.depth()) {
    case CV_8U: scale = 1.0 / std::numeric_limits<std::uint8_t>::max(); break;
    case CV_8S: scale = 1.0 / std::numeric_limits<std::int8_t>::max(); break;
    case CV_16U: scale = 1.0 / std::numeric_limits<std::uint16_t>::max(); break;
    case CV_16S: scale = 1.0 / std::numeric_limits<std::int16_t>::max(); break;
    case CV_32S: scale = 1.0 / std::numeric_limits<std::int32_t>::max(); break;
    default: break;  // floating point input is taken as already in [0,1]
  }
  cv::Mat as_double;
  raw.convertTo(as_double, CV_MAKETYPE(CV_64F, raw.channels()), scale);
  std::vector<cv::Mat> channels;
  cv::split(as_double, channels);
  const int c = raw.channels();
  // OpenCV stores color as BGR(A); planar Image is RGB(A).
  if (c >= 3) std::swap(channels[0], channels[2]);
  Image planar(Dims{raw.rows, raw.cols, c});
  const std::size_t plane = static_cast<std::size_t>(raw.rows) * raw.cols;
  for (int i = 0; i < c; ++i) {
    cv::Mat dst(raw.rows, raw.cols, CV_64F, planar.pixels().data() + i * plane);
    channels[i].copyTo(dst);
  }
  for (double& p : planar.pixels()) p = std::isfinite(p) ? std::clamp(p, 0.0, 1.0) : p;
  return preprocess(planar, target);
}

Image load_image(const std::filesystem::path& path, Dims target) {
  cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw IoError("cannot decode image '" + path.string() + "'");
  return preprocess(raw, target);
}

Image load_image(const std::filesystem::path& path) {
  cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw IoError("cannot decode image '" + path.string() + "'");
  return preprocess(raw, Dims{raw.rows, raw.cols, raw.channels() >= 3 ? 3 : 1});
}

void save_image(const Image& image, const std::filesystem::path& path) {
  const bool png = path.extension() == ".png";
  const double max_value = png ? 65535.0 : 255.0;
  const int depth = png ? CV_16U : CV_8U;
  std::vector<cv::Mat> channels;
  const std::size_t plane = static_cast<std::size_t>(image.height()) * image.width();
  for (int c = 0; c < image.channels(); ++c) {
    cv::Mat p(image.height(), image.width(), CV_64F,
              const_cast<double*>(image.pixels().data()) + c * plane);
    cv::Mat q;
    p.convertTo(q, depth, max_value);
    channels.push_back(q);
  }
  if (channels.size() >= 3) std::swap(channels[0], channels[2]);
  cv::Mat merged;
  cv::merge(channels, merged);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), merged)) throw IoError("cannot write image '" + path.string() + "'");
}

void SampleBatch::push_back(Image image, int label, std::string id) {
  images.push_back(std::move(image));
  labels.push_back(label);
  ids.push_back(std::move(id));
}

SampleBatch SampleBatch::slice(std::size_t begin, std::size_t end) const {
  end = std::min(end, size());
  SampleBatch out;
  for (std::size_t i = begin; i < end; ++i) out.push_back(images[i], labels[i], ids[i]);
  return out;
}

Splits make_splits(const DatasetManifest& manifest, std::optional<std::size_t> train_size,
                   std::uint64_t seed) {
  std::vector<const ManifestEntry*> pool;
  for (const auto& e : manifest.entries) {
    if (e.split == Split::Train) pool.push_back(&e);
  }
  const std::size_t k = train_size.value_or(pool.size());
  if (k > pool.size()) {
    throw InvalidArgument("train_size " + std::to_string(k) + " exceeds the train pool of " +
                          std::to_string(pool.size()));
  }
  if (k == 0) throw InvalidArgument("train_size must be at least 1");
  std::vector<const ManifestEntry*> chosen;
  if (k == pool.size()) {
    chosen = pool;
  } else {
    std::mt19937_64 rng(seed);
    std::sample(pool.begin(), pool.end(), std::back_inserter(chosen), k, rng);
  }
  Splits s;
  for (const auto* e : chosen) s.train.push_back(load_image(e->path, manifest.target_dims), 1, e->id);
  s.test = load_test_split(manifest);
  return s;
}

SampleBatch load_test_split(const DatasetManifest& manifest) {
  SampleBatch test;
  for (const auto& e : manifest.entries) {
    if (e.split != Split::Test) continue;
    test.push_back(load_image(e.path, manifest.target_dims), e.class_id == manifest.majority_class ? 1 : 0, e.id);
  }
  return test;
}

void SyntheticConfig::validate() const {
  if (n_majority < 1 || n_minority < 1) throw InvalidArgument("synthetic counts must be >= 1");
  if (n_train < 1 || n_train >= n_majority + 1) {
    throw InvalidArgument("n_train must be in [1, n_majority]");
  }
  if (dims.height < 2 || dims.width < 2 || dims.channels < 1) {
    throw InvalidArgument("synthetic dims too small: " + to_string(dims));
  }
  if (!(contrast_shift > 0.0) || !std::isfinite(brightness_shift)) {
    throw InvalidArgument("contrast_shift must be positive and brightness_shift finite");
  }
}

namespace {

constexpr double kTextureCenter = 0.45;

// Smooth texture in [-1, 1]: a normalized sum of low-frequency plane waves
// with isotropically drawn integer wave vectors.
std::vector<double> smooth_texture(int h, int w, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> freq(-3, 3);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> weight(0.5, 1.0);
  std::vector<double> t(static_cast<std::size_t>(h) * w, 0.0);
  for (int k = 0; k < 6; ++k) {
    int fx = 0, fy = 0;
    while (fx == 0 && fy == 0) {
      fx = freq(rng);
      fy = freq(rng);
    }
    const double ph = phase(rng);
    const double a = weight(rng);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        t[y * w + x] += a * std::cos(2.0 * std::numbers::pi * (fx * double(x) / w + fy * double(y) / h) + ph);
      }
    }
  }
  double peak = 0.0;
  for (double v : t) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : t) v /= peak;
  }
  return t;
}

Image majority_texture(const SyntheticConfig& config, std::uint64_t class_tag, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(config.texture_seed),
                    static_cast<std::uint32_t>(config.texture_seed >> 32),
                    static_cast<std::uint32_t>(class_tag), static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  // mean in [0.35, 0.55] and amplitude in [0.05, 0.15] keep pixels in [0.2, 0.7]
  std::uniform_real_distribution<double> mean_dist(0.35, 0.55);
  std::uniform_real_distribution<double> amp_dist(0.05, 0.15);
  const double mean = mean_dist(rng);
  const double amp = amp_dist(rng);
  const auto tex = smooth_texture(config.dims.height, config.dims.width, rng);
  Image img(config.dims);
  const std::size_t plane = tex.size();
  for (int c = 0; c < config.dims.channels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) img.pixels()[c * plane + i] = mean + amp * tex[i];
  }
  return img;
}

std::string sample_name(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%05d", prefix, index);
  return std::string(buf);
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  SyntheticDataset ds;
  for (int i = 0; i < config.n_majority; ++i) {
    SyntheticSample s;
    s.split = i < config.n_train ? Split::Train : Split::Test;
    s.id = (s.split == Split::Train ? "majority/train" : "majority/test") + sample_name("", i);
    s.class_id = "majority";
    s.image = majority_texture(config, 1, i);
    ds.samples.push_back(std::move(s));
  }
  std::size_t clipped = 0, total = 0;
  for (int i = 0; i < config.n_minority; ++i) {
    SyntheticSample s;
    s.split = Split::Test;
    s.id = "minority/test" + sample_name("", i);
    s.class_id = "minority";
    s.image = majority_texture(config, 2, i);
    for (double& p : s.image.pixels()) {
      const double v = kTextureCenter + config.contrast_shift * (p - kTextureCenter) + config.brightness_shift;
      if (v < 0.0 || v > 1.0) ++clipped;
      ++total;
      p = std::clamp(v, 0.0, 1.0);
    }
    ds.samples.push_back(std::move(s));
  }
  ds.minority_clip_fraction = total ? double(clipped) / total : 0.0;
  if (config.brightness_shift == 0.0 && config.contrast_shift == 1.0) {
    ds.warnings.push_back("signal-free dataset: minority and majority share one distribution");
  }
  if (ds.minority_clip_fraction > 0.5) {
    ds.warnings.push_back("more than 50% of minority pixels clipped; the class signal is largely destroyed");
  }
  return ds;
}

SynthesisResult synthesize(const SyntheticConfig& config, const std::filesystem::path& out_dir) {
  auto ds = generate_synthetic(config);
  std::filesystem::create_directories(out_dir);
  DatasetManifest m;
  m.target_dims = config.dims;
  m.majority_class = "majority";
  for (const auto& s : ds.samples) {
    ManifestEntry e;
    e.id = s.id + ".png";
    e.path = out_dir / e.id;
    e.class_id = s.class_id;
    e.split = s.split;
    save_image(s.image, e.path);
    m.entries.push_back(std::move(e));
  }
  const std::string text = manifest_to_csv(m);
  m.content_hash = sha256_hex(text);
  SynthesisResult r;
  r.manifest_path = out_dir / "manifest.csv";
  write_file_atomic(r.manifest_path, text);
  r.manifest = std::move(m);
  r.warnings = std::move(ds.warnings);
  return r;
}

}  // namespace occ

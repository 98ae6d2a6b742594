#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "occkit/image.hpp"

namespace cv {
class Mat;
}

namespace occ {

enum class Split { Train, Test };

struct ManifestEntry {
  std::filesystem::path path;  // resolved against the manifest's directory
  std::string id;              // path as written in the manifest
  std::string class_id;
  Split split = Split::Train;
};

// Manifest file format: optional comment lines starting with '#', of which
// "# dims: HxWxC" sets the target dimensions, then a header line
// "path,class_id,split" and one row per image. Relative paths resolve
// against the manifest's directory.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  Dims target_dims;
  std::string majority_class;  // the single class of the train split
  std::string content_hash;    // sha256 of the manifest text

  std::size_t train_pool_size() const;
};

// `dims_override` replaces (or supplies) the "# dims:" directive.
DatasetManifest load_manifest(const std::filesystem::path& path,
                              std::optional<Dims> dims_override = std::nullopt);
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                               const std::string& source,
                               std::optional<Dims> dims_override = std::nullopt,
                               bool check_files = true);
std::string manifest_to_csv(const DatasetManifest& manifest);

// Resizes (bilinear), converts channels (gray replicated, color reduced to
// Rec.601 luminance, alpha dropped) and clamps to [0,1]. `raw` is planar RGB.
Image preprocess(const Image& raw, Dims target);

// Decoded raster as returned by OpenCV (BGR channel order, any depth).
// Integer depths are scaled by their maximum representable value.
Image preprocess(const cv::Mat& raw, Dims target);

Image load_image(const std::filesystem::path& path, Dims target);
// Native size; color images keep three channels, alpha is dropped.
Image load_image(const std::filesystem::path& path);

// Writes a [0,1] image as a 16-bit PNG (8-bit for other extensions).
void save_image(const Image& image, const std::filesystem::path& path);

struct SampleBatch {
  std::vector<Image> images;
  // Stage dependent: transform labels for training pairs, or 1 = majority /
  // 0 = minority ground-truth flags for test samples.
  std::vector<int> labels;
  std::vector<std::string> ids;

  std::size_t size() const { return images.size(); }
  bool empty() const { return images.empty(); }
  void push_back(Image image, int label, std::string id);
  SampleBatch slice(std::size_t begin, std::size_t end) const;
};

struct Splits {
  SampleBatch train;
  SampleBatch test;
};

// Every test entry, labelled 1 (majority class) or 0, in manifest order.
SampleBatch load_test_split(const DatasetManifest& manifest);

// `train_size` empty means the full train pool (manifest order, seed ignored).
// Otherwise that many train entries are drawn uniformly without replacement.
Splits make_splits(const DatasetManifest& manifest, std::optional<std::size_t> train_size,
                   std::uint64_t seed);

struct SyntheticConfig {
  int n_majority = 2022;
  int n_minority = 978;
  int n_train = 1500;  // majority samples placed in the train split
  Dims dims{32, 32, 1};
  double brightness_shift = 0.2;
  double contrast_shift = 1.2;
  std::uint64_t texture_seed = 0;

  void validate() const;
};

struct SyntheticSample {
  std::string id;
  std::string class_id;  // "majority" or "minority"
  Split split = Split::Train;
  Image image;
};

struct SyntheticDataset {
  std::vector<SyntheticSample> samples;
  double minority_clip_fraction = 0.0;  // share of minority pixels clipped
  std::vector<std::string> warnings;
};

// Majority samples are smooth random textures with intensities in
// [0.2, 0.7]. Minority samples are drawn from the same texture family and
// mapped by p -> clip(0.45 + contrast_shift * (p - 0.45) + brightness_shift).
// Each sample depends only on (texture_seed, class, index).
SyntheticDataset generate_synthetic(const SyntheticConfig& config);

struct SynthesisResult {
  DatasetManifest manifest;
  std::filesystem::path manifest_path;
  std::vector<std::string> warnings;
};

// Materializes images under `out_dir` plus `out_dir/manifest.csv`.
SynthesisResult synthesize(const SyntheticConfig& config, const std::filesystem::path& out_dir);

}  // namespace occ

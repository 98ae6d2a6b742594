#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <opencv2/core.hpp>
#include <random>
#include <set>

#include "occkit/dataio.hpp"
#include "occkit/error.hpp"
#include "occkit/io_util.hpp"
#include "support.hpp"

using namespace occ;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("occkit_dataio_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Writes `n` small images named img<i>.png into dir.
void write_images(const fs::path& dir, int n) {
  for (int i = 0; i < n; ++i) save_image(Image(Dims{4, 4, 1}, 0.1 * (i % 10)), dir / ("img" + std::to_string(i) + ".png"));
}

}  // namespace

TEST(Manifest, AcceptsSingleClassTrainSplit) {
  TempDir tmp;
  write_images(tmp.path(), 4);
  const std::string text =
      "# dims: 4x4x1\n"
      "path,class_id,split\n"
      "img0.png,B,train\n"
      "img1.png,B,train\n"
      "img2.png,B,test\n"
      "img3.png,other,test\n";
  const auto m = parse_manifest(text, tmp.path(), "m.csv");
  EXPECT_EQ(m.entries.size(), 4u);
  EXPECT_EQ(m.majority_class, "B");
  EXPECT_EQ(m.train_pool_size(), 2u);
  EXPECT_EQ(m.target_dims, (Dims{4, 4, 1}));
  EXPECT_EQ(m.entries[0].path, tmp.path() / "img0.png");

  const auto test = load_test_split(m);
  ASSERT_EQ(test.size(), 2u);
  EXPECT_EQ(test.labels, (std::vector<int>{1, 0}));
}

TEST(Manifest, RejectsMixedTrainSplit) {
  const std::string text =
      "# dims: 4x4x1\npath,class_id,split\n"
      "a.png,B,train\n"
      "b.png,M,train\n";
  EXPECT_THROW(parse_manifest(text, ".", "m.csv", std::nullopt, false), InvalidArgument);
}

TEST(Manifest, RejectsEmpty) {
  try {
    parse_manifest("# dims: 4x4x1\npath,class_id,split\n", ".", "m.csv", std::nullopt, false);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("no entries"), std::string::npos);
  }
}

TEST(Manifest, ErrorsCarryLineNumbers) {
  try {
    parse_manifest("# dims: 4x4x1\npath,class_id,split\na.png,B,train\nb.png,B\n", ".", "m.csv", std::nullopt, false);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
  }
  TempDir tmp;
  EXPECT_THROW(parse_manifest("# dims: 4x4x1\npath,class_id,split\nmissing.png,B,train\n", tmp.path(), "m.csv"),
               ParseError);
  EXPECT_THROW(load_manifest(tmp.path() / "nope.csv"), IoError);
}

TEST(Preprocess, EightBitMaxIsOne) {
  cv::Mat raw(3, 3, CV_8UC1, cv::Scalar(255));
  const Image img = preprocess(raw, Dims{3, 3, 1});
  for (double v : img.pixels()) EXPECT_DOUBLE_EQ(v, 1.0);
  cv::Mat raw16(3, 3, CV_16UC1, cv::Scalar(65535));
  const Image img16 = preprocess(raw16, Dims{3, 3, 1});
  for (double v : img16.pixels()) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Preprocess, ConstantImageStaysConstantWhenDownsampled) {
  const Image big(Dims{256, 256, 1}, 0.37);
  const Image small = preprocess(big, Dims{128, 128, 1});
  EXPECT_EQ(small.dims(), (Dims{128, 128, 1}));
  for (double v : small.pixels()) EXPECT_NEAR(v, 0.37, 1e-12);
}

TEST(Preprocess, LuminanceOfHandPatch) {
  // planar RGB 2x2 patch
  const Image rgb(Dims{2, 2, 3}, {1.0, 0.0, 0.2, 0.5,    // R
                                  0.0, 1.0, 0.4, 0.5,    // G
                                  0.0, 0.0, 0.6, 0.5});  // B
  const Image gray = preprocess(rgb, Dims{2, 2, 1});
  // 0.299 R + 0.587 G + 0.114 B, evaluated by hand
  EXPECT_NEAR(gray.at(0, 0), 0.299, 1e-12);
  EXPECT_NEAR(gray.at(0, 1), 0.587, 1e-12);
  EXPECT_NEAR(gray.at(1, 0), 0.0598 + 0.2348 + 0.0684, 1e-12);
  EXPECT_NEAR(gray.at(1, 1), 0.5, 1e-12);
}

TEST(Preprocess, ColorMatIsConvertedFromBgr) {
  cv::Mat bgr(1, 1, CV_8UC3, cv::Scalar(0, 0, 255));  // pure red
  const Image rgb = preprocess(bgr, Dims{1, 1, 3});
  EXPECT_DOUBLE_EQ(rgb.at(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(rgb.at(0, 0, 2), 0.0);
}

TEST(Preprocess, Idempotent) {
  std::mt19937_64 rng(4);
  const Image raw = oracle::random_image({40, 30, 3}, rng);
  const Dims target{16, 16, 1};
  const Image once = preprocess(raw, target);
  const Image twice = preprocess(once, target);
  ASSERT_EQ(once.dims(), twice.dims());
  for (std::size_t i = 0; i < once.pixels().size(); ++i) EXPECT_NEAR(once.pixels()[i], twice.pixels()[i], 1e-12);
}

TEST(Preprocess, PngRoundTrip) {
  TempDir tmp;
  std::mt19937_64 rng(9);
  const Image img = oracle::random_image({5, 7, 1}, rng);
  save_image(img, tmp.path() / "x.png");
  const Image back = load_image(tmp.path() / "x.png", Dims{5, 7, 1});
  for (std::size_t i = 0; i < img.pixels().size(); ++i) EXPECT_NEAR(img.pixels()[i], back.pixels()[i], 1.0 / 65535);
}

class SplitsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    write_images(tmp_.path(), 20);
    std::string text = "# dims: 4x4x1\npath,class_id,split\n";
    for (int i = 0; i < 20; ++i) {
      text += "img" + std::to_string(i) + ".png," + (i < 15 ? "B" : "M") + "," + (i < 12 ? "train" : "test") + "\n";
    }
    manifest_ = parse_manifest(text, tmp_.path(), "m.csv");
  }
  TempDir tmp_;
  DatasetManifest manifest_;
};

TEST_F(SplitsTest, FullPoolIgnoresSeed) {
  const auto a = make_splits(manifest_, std::nullopt, 1);
  const auto b = make_splits(manifest_, std::nullopt, 999);
  EXPECT_EQ(a.train.ids, b.train.ids);
  EXPECT_EQ(a.train.size(), 12u);
  EXPECT_EQ(make_splits(manifest_, 12, 5).train.ids, a.train.ids);
}

TEST_F(SplitsTest, SubsampleIsDeterministicPartition) {
  const auto a = make_splits(manifest_, 5, 7);
  const auto b = make_splits(manifest_, 5, 7);
  EXPECT_EQ(a.train.ids, b.train.ids);
  EXPECT_EQ(a.test.ids, b.test.ids);
  ASSERT_EQ(a.train.size(), 5u);
  EXPECT_EQ(a.test.size(), 8u);
  std::set<std::string> train(a.train.ids.begin(), a.train.ids.end()), test(a.test.ids.begin(), a.test.ids.end());
  EXPECT_EQ(train.size(), 5u);
  for (const auto& id : train) EXPECT_FALSE(test.count(id));
}

TEST_F(SplitsTest, RejectsBadSizes) {
  EXPECT_THROW(make_splits(manifest_, 13, 0), InvalidArgument);
  EXPECT_THROW(make_splits(manifest_, 0, 0), InvalidArgument);
}

TEST(Synthetic, DefaultShapeMatchesSkinSplit) {
  SyntheticConfig c;
  EXPECT_EQ(c.n_train, 1500);
  EXPECT_EQ(c.n_majority - c.n_train, 522);
  EXPECT_EQ(c.n_minority, 978);
}

TEST(Synthetic, DeterministicAndLabelled) {
  SyntheticConfig c;
  c.n_majority = 30;
  c.n_train = 20;
  c.n_minority = 10;
  c.dims = {8, 8, 1};
  const auto a = generate_synthetic(c);
  const auto b = generate_synthetic(c);
  ASSERT_EQ(a.samples.size(), 40u);
  int train = 0, minority = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].image, b.samples[i].image);
    EXPECT_EQ(a.samples[i].id, b.samples[i].id);
    check_unit_range(a.samples[i].image);
    train += a.samples[i].split == Split::Train;
    if (a.samples[i].class_id == "minority") {
      ++minority;
      EXPECT_EQ(a.samples[i].split, Split::Test);
    }
  }
  EXPECT_EQ(train, 20);
  EXPECT_EQ(minority, 10);
  c.texture_seed = 1;
  EXPECT_NE(generate_synthetic(c).samples[0].image, a.samples[0].image);
}

TEST(Synthetic, BrightnessShiftMovesMinorityMean) {
  SyntheticConfig c;
  c.n_majority = 1000;
  c.n_train = 500;
  c.n_minority = 1000;
  c.dims = {8, 8, 1};
  c.brightness_shift = 0.2;
  c.contrast_shift = 1.0;  // keeps every minority pixel inside [0,1], so no clipping
  const auto ds = generate_synthetic(c);
  EXPECT_EQ(ds.minority_clip_fraction, 0.0);
  double maj = 0, mnr = 0;
  for (const auto& s : ds.samples) (s.class_id == "majority" ? maj : mnr) += s.image.mean();
  EXPECT_NEAR(mnr / 1000 - maj / 1000, 0.2, 0.01);
}

TEST(Synthetic, SignalFreeWarning) {
  SyntheticConfig c;
  c.n_majority = 4;
  c.n_train = 2;
  c.n_minority = 2;
  c.dims = {8, 8, 1};
  c.brightness_shift = 0.0;
  c.contrast_shift = 1.0;
  const auto ds = generate_synthetic(c);
  ASSERT_FALSE(ds.warnings.empty());
  EXPECT_NE(ds.warnings[0].find("signal-free dataset"), std::string::npos);
}

TEST(Synthetic, SynthesizeWritesLoadableManifest) {
  TempDir tmp;
  SyntheticConfig c;
  c.n_majority = 6;
  c.n_train = 4;
  c.n_minority = 3;
  c.dims = {8, 8, 1};
  const auto r = synthesize(c, tmp.path());
  const auto m = load_manifest(r.manifest_path);
  EXPECT_EQ(m.entries.size(), 9u);
  EXPECT_EQ(m.train_pool_size(), 4u);
  EXPECT_EQ(m.majority_class, "majority");
  EXPECT_EQ(m.target_dims, c.dims);
  const std::string hash = m.content_hash;
  TempDir tmp2;
  EXPECT_EQ(load_manifest(synthesize(c, tmp2.path()).manifest_path).content_hash, hash);
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "occkit/error.hpp"
#include "occkit/experiment.hpp"
#include "occkit/io_util.hpp"

using namespace occ;
namespace fs = std::filesystem;

namespace {

class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("occkit_exp_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  ExperimentConfig tiny(const std::string& name) const {
    const std::string json = R"J({
      "dataset": {"synthetic": {"n_majority": 30, "n_minority": 10, "n_train": 20, "dims": "8x8x1"}},
      "transform_set": "LM(5,2)",
      "classifier": {"architecture": "small_conv(1)"},
      "train": {"epochs": 1, "batch_size": 32, "learning_rate": 0.005},
      "runs": 2,
      "seed": 11,
      "output_dir": ")J" + (dir_ / name).string() + R"J("})J";
    return parse_experiment_config(json, dir_);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(ExperimentTest, ParsesConfigAndDefaults) {
  const auto c = tiny("a");
  EXPECT_EQ(c.transform_set, "LM(5,2)");
  EXPECT_EQ(c.architecture, Architecture::small_conv(1));
  EXPECT_EQ(c.train.epochs, 1);
  EXPECT_EQ(c.train.batch_size, 32);
  EXPECT_EQ(c.runs, 2);
  EXPECT_EQ(c.run_seed(0), 11u);
  EXPECT_EQ(c.run_seed(2), 13u);
  ASSERT_TRUE(c.dataset.synthetic.has_value());
  EXPECT_EQ(c.dataset.synthetic->n_train, 20);
  EXPECT_FALSE(c.train_size.has_value());

  const auto d = parse_experiment_config(R"({"dataset": {"manifest": "m.csv"}})", dir_);
  EXPECT_EQ(d.transform_set, "LM(5,0)");
  EXPECT_EQ(d.train.epochs, 50);
  EXPECT_EQ(d.runs, 3);
  EXPECT_EQ(*d.dataset.manifest, dir_ / "m.csv");

  const auto round = parse_experiment_config(experiment_config_to_json(c), dir_);
  EXPECT_EQ(experiment_config_to_json(round), experiment_config_to_json(c));
}

TEST_F(ExperimentTest, RejectsBadConfigs) {
  EXPECT_THROW(parse_experiment_config("{", dir_), ParseError);
  EXPECT_THROW(parse_experiment_config(R"({"dataset": {"manifest": "m.csv"}, "bogus": 1})", dir_), InvalidArgument);
  EXPECT_THROW(parse_experiment_config(R"({"dataset": {"manifest": "m.csv"}, "runs": 0})", dir_), InvalidArgument);
  EXPECT_THROW(parse_experiment_config(R"({"runs": 1})", dir_).validate(), InvalidArgument);
  EXPECT_THROW(
      parse_experiment_config(R"({"dataset": {"manifest": "m.csv", "synthetic": {"n_majority": 4}}})", dir_),
      InvalidArgument);
  EXPECT_THROW(parse_experiment_config(R"({"dataset": {}})", dir_), InvalidArgument);
  EXPECT_THROW(parse_experiment_config(R"({"dataset": {"manifest": "m.csv"}, "train": {"epochs": 0}})", dir_),
               InvalidArgument);
}

TEST_F(ExperimentTest, MissingManifestNamesPath) {
  auto c = parse_experiment_config(R"({"dataset": {"manifest": "absent/manifest.csv"}, "output_dir": "x"})", dir_);
  try {
    cmd_train(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("absent/manifest.csv"), std::string::npos);
  }
}

TEST_F(ExperimentTest, TrainThenEvaluate) {
  const auto c = tiny("run");
  const auto runs = cmd_train(c);
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].seed, 11u);
  EXPECT_EQ(runs[1].seed, 12u);
  EXPECT_NE(sha256_file(runs[0].model_path), sha256_file(runs[1].model_path));
  EXPECT_TRUE(fs::exists(run_dir(c.output_dir, 1) / files::kLoss));

  const auto report = cmd_evaluate(c, {runs[0].model_path, runs[1].model_path});
  EXPECT_EQ(report.runs, 2);
  EXPECT_GE(report.auc.mean, 0.0);
  EXPECT_LE(report.auc.mean, 1.0);
  for (const char* f : {files::kMetrics, files::kRoc, files::kPr, files::kProvenance}) {
    EXPECT_TRUE(fs::exists(c.output_dir / f)) << f;
  }
  EXPECT_TRUE(fs::exists(run_dir(c.output_dir, 0) / files::kScores));

  // single run gives zero spread
  const auto single = cmd_evaluate(c, {runs[0].model_path});
  EXPECT_EQ(single.auc.std, 0.0);
}

TEST_F(ExperimentTest, EvaluateRejectsMismatchedModelBeforeScoring) {
  auto c = tiny("mismatch");
  c.runs = 1;
  const auto runs = cmd_train(c);
  fs::remove(c.output_dir / files::kMetrics);
  c.transform_set = "LM(3,0)";
  EXPECT_THROW(cmd_evaluate(c, {runs[0].model_path}), DimensionError);
  EXPECT_FALSE(fs::exists(run_dir(c.output_dir, 0) / files::kScores));
  EXPECT_FALSE(fs::exists(c.output_dir / files::kMetrics));
}

TEST_F(ExperimentTest, CompareRejectsUnknownPresetUpFront) {
  const auto c = tiny("cmp");
  try {
    cmd_compare_transforms(c, {"LM(5,2)", "XX(1,1)"});
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("LM(5,0)"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(c.output_dir / "LM_5_2"));
}

TEST_F(ExperimentTest, CompareSinglePresetGivesOneRow) {
  auto c = tiny("cmp1");
  c.runs = 1;
  const auto rows = cmd_compare_transforms(c, {"LM(3,0)"});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].n, 3);
  const std::string csv = read_file(c.output_dir / "comparison.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST_F(ExperimentTest, SweepContinuesPastOversizedRequest) {
  auto c = tiny("sweep");
  c.runs = 1;
  const auto rows = cmd_size_sweep(c, {5, 500, 20});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(rows[0].report.has_value());
  EXPECT_FALSE(rows[1].report.has_value());
  EXPECT_NE(rows[1].error.find("exceeds"), std::string::npos);
  EXPECT_TRUE(rows[2].report.has_value());
  EXPECT_TRUE(fs::exists(c.output_dir / "sweep.csv"));
}

TEST_F(ExperimentTest, FullPoolSweepMatchesEvaluate) {
  auto c = tiny("pool");
  c.runs = 1;
  const auto direct = run_experiment(c);
  auto s = tiny("pool_sweep");
  s.runs = 1;
  const auto rows = cmd_size_sweep(s, {20});
  ASSERT_TRUE(rows[0].report.has_value());
  EXPECT_EQ(rows[0].report->auc.mean, direct.auc.mean);
}

TEST_F(ExperimentTest, SynthesisIsReproducible) {
  SyntheticConfig sc;
  sc.n_majority = 5;
  sc.n_train = 3;
  sc.n_minority = 2;
  sc.dims = {8, 8, 1};
  const auto a = cmd_synth(sc, dir_ / "s1");
  const auto b = cmd_synth(sc, dir_ / "s2");
  EXPECT_EQ(a.manifest.content_hash, b.manifest.content_hash);
  EXPECT_TRUE(fs::exists(dir_ / "s1" / files::kProvenance));
}

TEST_F(ExperimentTest, PreviewWritesEveryTransform) {
  const Image img(Dims{8, 8, 1}, 0.5);
  const auto rows = cmd_preview_transforms(img, preset("LM(3,0)"), dir_ / "preview");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].label, 1);
  EXPECT_NEAR(rows[0].mean_intensity, 0.2, 1e-4);
  for (const auto& r : rows) EXPECT_TRUE(fs::exists(r.image));
}

TEST(OutputDir, ResolvesAgainstRoot) {
  ::setenv("OCCKIT_OUTPUT_ROOT", "/tmp/occroot", 1);
  EXPECT_EQ(resolve_output_dir("a/b"), fs::path("/tmp/occroot/a/b"));
  EXPECT_EQ(resolve_output_dir("/abs"), fs::path("/abs"));
  ::unsetenv("OCCKIT_OUTPUT_ROOT");
  EXPECT_EQ(resolve_output_dir(""), fs::path("occkit_runs"));
}

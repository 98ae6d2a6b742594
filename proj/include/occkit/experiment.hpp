#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "occkit/classifier.hpp"
#include "occkit/dataio.hpp"
#include "occkit/evaluation.hpp"

namespace occ {

using Log = std::function<void(const std::string&)>;

struct DatasetSource {
  // Exactly one of the two is set.
  std::optional<std::filesystem::path> manifest;
  std::optional<SyntheticConfig> synthetic;
  std::optional<Dims> dims;                 // overrides the manifest's "# dims:" line
  std::optional<std::filesystem::path> dir;  // where a synthetic set is materialized
};

// Experiment description, read from JSON:
//   {
//     "dataset": {"manifest": "data/manifest.csv", "dims": "128x128x1"}
//             or {"synthetic": {"n_majority": 1200, "n_minority": 200, "n_train": 1000,
//                               "dims": "16x16x1", "brightness_shift": 0.2,
//                               "contrast_shift": 1.2, "texture_seed": 0},
//                 "dir": "data/synth"},
//     "transform_set": "LM(5,2)",            // preset name or transform-set file
//     "classifier": {"architecture": "small_conv"},
//     "train": {"learning_rate": 0.0002, "batch_size": 128, "epochs": 50},
//     "train_size": "all",                   // or a count
//     "runs": 3,
//     "seed": 0,
//     "output_dir": "runs/lm52"
//   }
// Relative paths resolve against the config file's directory, except
// output_dir which resolves against $OCCKIT_OUTPUT_ROOT when set.
struct ExperimentConfig {
  DatasetSource dataset;
  std::string transform_set = "LM(5,0)";
  Architecture architecture = Architecture::small_conv();
  TrainConfig train;
  std::optional<std::size_t> train_size;  // empty: the full train pool
  int runs = 3;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  void validate() const;
  // Seed of run `run_index` (0-based): base seed + run index.
  std::uint64_t run_seed(int run_index) const { return seed + static_cast<std::uint64_t>(run_index); }
};

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::filesystem::path& base_dir,
                                         const std::string& source = "<config>");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_to_json(const ExperimentConfig& config);

SyntheticConfig parse_synthetic_config(const std::string& json_text, const std::string& source = "<config>");

// Resolves `output_dir` against $OCCKIT_OUTPUT_ROOT (or the working
// directory) when relative; an empty path becomes "occkit_runs".
std::filesystem::path resolve_output_dir(const std::filesystem::path& output_dir);

// Loads the manifest, materializing a synthetic dataset first if needed.
DatasetManifest resolve_dataset(const ExperimentConfig& config, const Log& log = {});

TransformSet resolve_experiment_transforms(const ExperimentConfig& config, Dims dims);

// Fixed file names inside an experiment directory.
namespace files {
inline constexpr const char* kModel = "model.bin";
inline constexpr const char* kLoss = "loss.csv";
inline constexpr const char* kScores = "scores.csv";
inline constexpr const char* kMetrics = "metrics.txt";
inline constexpr const char* kRoc = "roc.csv";
inline constexpr const char* kPr = "pr.csv";
inline constexpr const char* kProvenance = "provenance.txt";
inline constexpr const char* kManifest = "manifest.csv";
}  // namespace files

std::filesystem::path run_dir(const std::filesystem::path& output_dir, int run_index);

// --- commands -------------------------------------------------------------

SynthesisResult cmd_synth(const SyntheticConfig& config, const std::filesystem::path& out_dir, const Log& log = {});

struct PreviewRow {
  int label = 0;  // 1-based
  std::string transform;
  double mean_intensity = 0.0;
  std::filesystem::path image;
};

// Writes every transformed counterpart of `image` plus a listing CSV.
std::vector<PreviewRow> cmd_preview_transforms(const Image& image, const TransformSet& set,
                                               const std::filesystem::path& out_dir);

struct TrainedRun {
  int run_index = 0;
  std::uint64_t seed = 0;
  std::filesystem::path model_path;
  std::vector<double> loss_curve;
};

// Trains config.runs models into <output_dir>/run_<k>/.
std::vector<TrainedRun> cmd_train(const ExperimentConfig& config, const Log& log = {});

// Scores the test split with one model and writes `out_csv`.
ScoreBatchResult cmd_score(const ExperimentConfig& config, const std::filesystem::path& model_path,
                           const std::filesystem::path& out_csv, const Log& log = {});

// Scores the test split with each model, writes per-run scores/curves into
// the model's directory and the aggregate metrics.txt into output_dir. Every
// model is checked against the transform set before any scoring happens.
EvalReport cmd_evaluate(const ExperimentConfig& config, const std::vector<std::filesystem::path>& model_paths,
                        const Log& log = {});

// cmd_train followed by cmd_evaluate.
EvalReport run_experiment(const ExperimentConfig& config, const Log& log = {});

struct ComparisonRow {
  std::string transform_set;
  int n = 0;
  EvalReport report;
};

// One experiment per preset under <output_dir>/<slug>/, table in
// <output_dir>/comparison.csv. Unknown names are rejected before training.
std::vector<ComparisonRow> cmd_compare_transforms(const ExperimentConfig& config,
                                                  const std::vector<std::string>& presets, const Log& log = {});
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

struct SweepRow {
  std::size_t train_size = 0;
  std::optional<EvalReport> report;
  std::string error;
};

// One experiment per training size under <output_dir>/size_<k>/, table in
// <output_dir>/sweep.csv. A failing size is recorded and the sweep continues.
std::vector<SweepRow> cmd_size_sweep(const ExperimentConfig& config, const std::vector<std::size_t>& sizes,
                                     const Log& log = {});
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace occ

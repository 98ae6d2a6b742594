// occkit command-line tool: synthetic data, transform previews, training,
// scoring and evaluation of transformation-prediction one-class classifiers.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "occkit/error.hpp"
#include "occkit/experiment.hpp"
#include "occkit/io_util.hpp"

namespace fs = std::filesystem;

namespace {

void log_line(const std::string& msg) { std::cerr << msg << std::endl; }

// Flags that override values from an experiment config file.
struct Overrides {
  std::string config;
  std::string manifest;
  std::string dims;
  std::string transform_set;
  std::string architecture;
  std::string train_size;
  std::string output_dir;
  std::optional<int> runs;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> learning_rate;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--manifest", manifest, "Dataset manifest, replaces the config's dataset");
    app->add_option("--dims", dims, "Target dims HxWxC");
    app->add_option("--transform-set", transform_set, "Preset name or transform-set file");
    app->add_option("--architecture", architecture, "small_conv, small_conv(k) or wide_residual(depth,k)");
    app->add_option("--train-size", train_size, "Training sample count or 'all'");
    app->add_option("-o,--output-dir", output_dir, "Experiment output directory");
    app->add_option("--runs", runs, "Repetitions with seeds base+0, base+1, ...");
    app->add_option("--epochs", epochs);
    app->add_option("--batch-size", batch_size);
    app->add_option("--learning-rate", learning_rate);
    app->add_option("--seed", seed, "Base seed");
  }

  occ::ExperimentConfig load() const {
    auto c = occ::load_experiment_config(config);
    if (!manifest.empty()) {
      c.dataset.manifest = manifest;
      c.dataset.synthetic.reset();
    }
    if (!dims.empty()) c.dataset.dims = occ::parse_dims(dims);
    if (!transform_set.empty()) c.transform_set = transform_set;
    if (!architecture.empty()) c.architecture = occ::Architecture::parse(architecture);
    if (!train_size.empty()) {
      if (train_size == "all") {
        c.train_size.reset();
      } else {
        c.train_size = std::stoull(train_size);
      }
    }
    if (!output_dir.empty()) c.output_dir = output_dir;
    if (runs) c.runs = *runs;
    if (epochs) c.train.epochs = *epochs;
    if (batch_size) c.train.batch_size = *batch_size;
    if (learning_rate) c.train.learning_rate = *learning_rate;
    if (seed) c.seed = *seed;
    return c;
  }
};

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::string cur;
    int depth = 0;
    for (char ch : item) {
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      if (ch == ',' && depth == 0) {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occkit: one-class image classification by transformation prediction"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic majority/minority dataset");
  occ::SyntheticConfig sc;
  std::string synth_config, synth_dims, synth_out;
  synth->add_option("-c,--config", synth_config, "Synthetic config (JSON)")->check(CLI::ExistingFile);
  synth->add_option("--n-majority", sc.n_majority);
  synth->add_option("--n-minority", sc.n_minority);
  synth->add_option("--n-train", sc.n_train, "Majority samples placed in the train split");
  synth->add_option("--dims", synth_dims, "HxWxC");
  synth->add_option("--brightness-shift", sc.brightness_shift);
  synth->add_option("--contrast-shift", sc.contrast_shift);
  synth->add_option("--seed", sc.texture_seed);
  synth->add_option("-o,--out", synth_out, "Output directory");

  // preview-transforms
  auto* preview = app.add_subcommand("preview-transforms", "Write every transformed counterpart of one image");
  std::string preview_image, preview_set = "LM(5,0)", preview_dims, preview_out;
  preview->add_option("--image", preview_image, "Input image; a synthetic texture when omitted")
      ->check(CLI::ExistingFile);
  preview->add_option("-t,--transform-set", preview_set, "Preset name or transform-set file");
  preview->add_option("--dims", preview_dims, "Resize to HxWxC first");
  preview->add_option("-o,--out", preview_out, "Output directory");

  auto* train = app.add_subcommand("train", "Train one model per run");
  Overrides train_ov;
  train_ov.attach(train);

  auto* score = app.add_subcommand("score", "Score the test split with one model");
  Overrides score_ov;
  score_ov.attach(score);
  std::string score_model, score_out;
  score->add_option("-m,--model", score_model, "Model file")->required()->check(CLI::ExistingFile);
  score->add_option("--out", score_out, "Score CSV (default <output_dir>/scores.csv)");

  auto* evaluate = app.add_subcommand("evaluate", "Score and compute AUC / AUPR over runs");
  Overrides eval_ov;
  eval_ov.attach(evaluate);
  std::vector<std::string> eval_models;
  evaluate->add_option("-m,--model", eval_models, "Model files (default <output_dir>/run_<k>/model.bin)");

  auto* compare = app.add_subcommand("compare-transforms", "Train and evaluate once per transform preset");
  Overrides cmp_ov;
  cmp_ov.attach(compare);
  std::vector<std::string> cmp_presets;
  compare->add_option("-p,--presets", cmp_presets, "Preset names, e.g. 'LM(5,0),S(4,0),R(4,0)'")->required();

  auto* sweep = app.add_subcommand("size-sweep", "Train and evaluate once per training-set size");
  Overrides sweep_ov;
  sweep_ov.attach(sweep);
  std::vector<std::size_t> sweep_sizes;
  sweep->add_option("-s,--sizes", sweep_sizes, "Training sizes")->required()->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      if (!synth_config.empty()) {
        sc = occ::parse_synthetic_config(occ::read_file(synth_config), synth_config);
      }
      if (!synth_dims.empty()) sc.dims = occ::parse_dims(synth_dims);
      const fs::path out = occ::resolve_output_dir(synth_out.empty() ? fs::path("synthetic") : fs::path(synth_out));
      const auto r = occ::cmd_synth(sc, out, log_line);
      std::cout << r.manifest_path.string() << "\n";
      return 0;
    }
    if (*preview) {
      occ::Image image;
      if (preview_image.empty()) {
        occ::SyntheticConfig one;
        one.n_majority = 1;
        one.n_minority = 1;
        one.n_train = 1;
        if (!preview_dims.empty()) one.dims = occ::parse_dims(preview_dims);
        image = occ::generate_synthetic(one).samples.front().image;
      } else {
        image = preview_dims.empty() ? occ::load_image(preview_image)
                                     : occ::load_image(preview_image, occ::parse_dims(preview_dims));
      }
      const auto set = occ::resolve_transform_set(preview_set, image.height());
      const fs::path out = occ::resolve_output_dir(preview_out.empty() ? fs::path("preview") : fs::path(preview_out));
      for (const auto& row : occ::cmd_preview_transforms(image, set, out)) {
        std::cout << row.label << "," << row.transform << "," << occ::format_double(row.mean_intensity) << ","
                  << row.image.string() << "\n";
      }
      return 0;
    }
    if (*train) {
      const auto runs = occ::cmd_train(train_ov.load(), log_line);
      for (const auto& r : runs) std::cout << r.model_path.string() << "\n";
      return 0;
    }
    if (*score) {
      const auto cfg = score_ov.load();
      const fs::path out =
          score_out.empty() ? occ::resolve_output_dir(cfg.output_dir) / occ::files::kScores : fs::path(score_out);
      const auto result = occ::cmd_score(cfg, score_model, out, log_line);
      std::cout << out.string() << "\n";
      return result.failures.empty() ? 0 : 1;
    }
    if (*evaluate) {
      const auto cfg = eval_ov.load();
      std::vector<fs::path> models(eval_models.begin(), eval_models.end());
      if (models.empty()) {
        for (int k = 0; k < cfg.runs; ++k) {
          models.push_back(occ::run_dir(occ::resolve_output_dir(cfg.output_dir), k) / occ::files::kModel);
        }
      }
      const auto report = occ::cmd_evaluate(cfg, models, log_line);
      std::cout << "auc," << occ::format_percent(report.auc) << "\naupr_maj," << occ::format_percent(report.aupr_maj)
                << "\naupr_min," << occ::format_percent(report.aupr_min) << "\n";
      return 0;
    }
    if (*compare) {
      const auto rows = occ::cmd_compare_transforms(cmp_ov.load(), split_list(cmp_presets), log_line);
      std::cout << occ::comparison_csv(rows);
      return 0;
    }
    if (*sweep) {
      const auto rows = occ::cmd_size_sweep(sweep_ov.load(), sweep_sizes, log_line);
      std::cout << occ::sweep_csv(rows);
      for (const auto& r : rows) {
        if (!r.report) return 1;
      }
      return 0;
    }
  } catch (const occ::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}

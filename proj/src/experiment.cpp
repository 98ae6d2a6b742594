#include "occkit/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "occkit/error.hpp"
#include "occkit/io_util.hpp"

namespace occ {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void emit(const Log& log, const std::string& msg) {
  if (log) log(msg);
}

fs::path resolve_path(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

json synthetic_to_json(const SyntheticConfig& s) {
  return json{{"n_majority", s.n_majority},         {"n_minority", s.n_minority},
              {"n_train", s.n_train},               {"dims", to_string(s.dims)},
              {"brightness_shift", s.brightness_shift}, {"contrast_shift", s.contrast_shift},
              {"texture_seed", s.texture_seed}};
}

SyntheticConfig synthetic_from_json(const json& j) {
  static const std::vector<std::string> keys = {"n_majority",       "n_minority",     "n_train",     "dims",
                                                "brightness_shift", "contrast_shift", "texture_seed"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw InvalidArgument("unknown synthetic config key '" + k + "'");
    }
  }
  SyntheticConfig s;
  s.n_majority = j.value("n_majority", s.n_majority);
  s.n_minority = j.value("n_minority", s.n_minority);
  s.n_train = j.value("n_train", std::min(s.n_train, s.n_majority));
  if (j.contains("dims")) s.dims = parse_dims(j.at("dims").get<std::string>());
  s.brightness_shift = j.value("brightness_shift", s.brightness_shift);
  s.contrast_shift = j.value("contrast_shift", s.contrast_shift);
  s.texture_seed = j.value("texture_seed", s.texture_seed);
  s.validate();
  return s;
}

json config_to_json(const ExperimentConfig& c) {
  json dataset = json::object();
  if (c.dataset.manifest) dataset["manifest"] = c.dataset.manifest->string();
  if (c.dataset.synthetic) dataset["synthetic"] = synthetic_to_json(*c.dataset.synthetic);
  if (c.dataset.dims) dataset["dims"] = to_string(*c.dataset.dims);
  if (c.dataset.dir) dataset["dir"] = c.dataset.dir->string();
  return json{{"dataset", dataset},
              {"transform_set", c.transform_set},
              {"classifier", {{"architecture", c.architecture.describe()}}},
              {"train",
               {{"learning_rate", c.train.learning_rate},
                {"batch_size", c.train.batch_size},
                {"epochs", c.train.epochs}}},
              {"train_size", c.train_size ? json(*c.train_size) : json("all")},
              {"runs", c.runs},
              {"seed", c.seed},
              {"output_dir", c.output_dir.string()}};
}

json file_record(const fs::path& p) { return json{{"path", p.string()}, {"sha256", sha256_file(p)}}; }

void write_provenance(const fs::path& dir, const std::string& command, const json& config,
                      const std::string& dataset_hash, const std::vector<fs::path>& models, json extra = json::object()) {
  json doc{{"tool", "occkit"}, {"command", command}, {"config", config}, {"dataset_hash", dataset_hash}};
  json m = json::array();
  for (const auto& p : models) m.push_back(file_record(p));
  doc["models"] = m;
  for (const auto& [k, v] : extra.items()) doc[k] = v;
  write_file_atomic(dir / files::kProvenance, doc.dump(2) + "\n");
}

std::string slug(const std::string& name) {
  std::string out;
  for (char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      out.push_back(ch);
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::string metric_columns(const EvalReport& r) {
  std::ostringstream out;
  out << format_double(r.auc.mean) << "," << format_double(r.auc.std) << "," << format_double(r.aupr_maj.mean) << ","
      << format_double(r.aupr_maj.std) << "," << format_double(r.aupr_min.mean) << ","
      << format_double(r.aupr_min.std) << "," << format_percent(r.auc);
  return out.str();
}

constexpr const char* kMetricHeader =
    "auc_mean,auc_std,aupr_maj_mean,aupr_maj_std,aupr_min_mean,aupr_min_std,auc_percent";

}  // namespace

namespace {

// Checks that need no filesystem access.
void check_fields(const ExperimentConfig& c) {
  if (c.dataset.manifest && c.dataset.synthetic) {
    throw InvalidArgument("dataset must name exactly one of 'manifest' or 'synthetic'");
  }
  if (c.dataset.synthetic) c.dataset.synthetic->validate();
  if (c.runs < 1) throw InvalidArgument("runs must be >= 1");
  if (c.train_size && *c.train_size == 0) throw InvalidArgument("train_size must be >= 1");
  c.architecture.validate();
  c.train.validate();
}

}  // namespace

void ExperimentConfig::validate() const {
  check_fields(*this);
  if (!dataset.manifest && !dataset.synthetic) throw InvalidArgument("no dataset: give a manifest or a synthetic config");
  if (dataset.manifest && !fs::exists(*dataset.manifest)) {
    throw IoError("manifest not found: " + dataset.manifest->string());
  }
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), transform_set) == names.end() && !fs::exists(transform_set)) {
    preset(transform_set);  // throws listing the valid names
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text, const fs::path& base_dir,
                                         const std::string& source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, e.what());
  }
  static const std::vector<std::string> keys = {"dataset", "transform_set", "classifier", "train",
                                                "train_size", "runs", "seed", "output_dir"};
  ExperimentConfig c;
  try {
    for (const auto& [k, v] : doc.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw InvalidArgument(source + ": unknown config key '" + k + "'");
      }
    }
    // "dataset" may be left out when the caller supplies a manifest later.
    const json& ds = doc.contains("dataset") ? doc.at("dataset") : json::object();
    if (doc.contains("dataset") && !ds.contains("manifest") && !ds.contains("synthetic")) {
      throw InvalidArgument(source + ": dataset must name 'manifest' or 'synthetic'");
    }
    if (ds.contains("manifest")) c.dataset.manifest = resolve_path(base_dir, ds.at("manifest").get<std::string>());
    if (ds.contains("synthetic")) c.dataset.synthetic = synthetic_from_json(ds.at("synthetic"));
    if (ds.contains("dims")) c.dataset.dims = parse_dims(ds.at("dims").get<std::string>());
    if (ds.contains("dir")) c.dataset.dir = resolve_path(base_dir, ds.at("dir").get<std::string>());
    if (doc.contains("transform_set")) {
      c.transform_set = doc.at("transform_set").get<std::string>();
      const auto& names = preset_names();
      if (std::find(names.begin(), names.end(), c.transform_set) == names.end()) {
        const auto p = resolve_path(base_dir, c.transform_set);
        if (fs::exists(p)) c.transform_set = p.string();
      }
    }
    if (doc.contains("classifier")) {
      const json& cl = doc.at("classifier");
      if (cl.contains("architecture")) c.architecture = Architecture::parse(cl.at("architecture").get<std::string>());
    }
    if (doc.contains("train")) {
      const json& t = doc.at("train");
      c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
      c.train.batch_size = t.value("batch_size", c.train.batch_size);
      c.train.epochs = t.value("epochs", c.train.epochs);
    }
    if (doc.contains("train_size")) {
      const json& ts = doc.at("train_size");
      if (ts.is_string()) {
        if (ts.get<std::string>() != "all") throw InvalidArgument(source + ": train_size must be a count or \"all\"");
      } else {
        c.train_size = ts.get<std::size_t>();
      }
    }
    c.runs = doc.value("runs", c.runs);
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("output_dir")) c.output_dir = doc.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(source, 0, e.what());
  }
  try {
    check_fields(c);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(source + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("config file not found: " + path.string());
  auto c = parse_experiment_config(read_file(path), path.parent_path(), path.string());
  if (c.output_dir.empty()) c.output_dir = path.stem();
  return c;
}

std::string experiment_config_to_json(const ExperimentConfig& config) { return config_to_json(config).dump(2); }

SyntheticConfig parse_synthetic_config(const std::string& json_text, const std::string& source) {
  try {
    return synthetic_from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw ParseError(source, 0, e.what());
  }
}

fs::path resolve_output_dir(const fs::path& output_dir) {
  fs::path dir = output_dir.empty() ? fs::path("occkit_runs") : output_dir;
  if (dir.is_absolute()) return dir;
  if (const char* root = std::getenv("OCCKIT_OUTPUT_ROOT"); root && *root) return fs::path(root) / dir;
  return dir;
}

fs::path run_dir(const fs::path& output_dir, int run_index) {
  return output_dir / ("run_" + std::to_string(run_index));
}

DatasetManifest resolve_dataset(const ExperimentConfig& config, const Log& log) {
  if (config.dataset.manifest) return load_manifest(*config.dataset.manifest, config.dataset.dims);
  if (!config.dataset.synthetic) throw InvalidArgument("config names no dataset");
  const auto& synth = *config.dataset.synthetic;
  const fs::path dir = config.dataset.dir ? *config.dataset.dir : resolve_output_dir(config.output_dir) / "dataset";
  const fs::path stamp = dir / "synthetic.json";
  const std::string wanted = synthetic_to_json(synth).dump();
  if (!(fs::exists(stamp) && fs::exists(dir / files::kManifest) && read_file(stamp) == wanted)) {
    emit(log, "synthesizing dataset into " + dir.string());
    cmd_synth(synth, dir, log);
    write_file_atomic(stamp, wanted);
  }
  return load_manifest(dir / files::kManifest, config.dataset.dims);
}

TransformSet resolve_experiment_transforms(const ExperimentConfig& config, Dims dims) {
  return resolve_transform_set(config.transform_set, dims.height);
}

SynthesisResult cmd_synth(const SyntheticConfig& config, const fs::path& out_dir, const Log& log) {
  auto result = synthesize(config, out_dir);
  for (const auto& w : result.warnings) emit(log, "warning: " + w);
  json extra{{"manifest", result.manifest_path.string()}, {"warnings", result.warnings}};
  write_provenance(out_dir, "synth", synthetic_to_json(config), result.manifest.content_hash, {}, extra);
  emit(log, "wrote " + std::to_string(result.manifest.entries.size()) + " images, manifest hash " +
                result.manifest.content_hash);
  return result;
}

std::vector<PreviewRow> cmd_preview_transforms(const Image& image, const TransformSet& set, const fs::path& out_dir) {
  std::vector<PreviewRow> rows;
  std::ostringstream csv;
  csv << "label,transform,mean_intensity,image\n";
  for (auto& [im, label] : expand(image, set)) {
    PreviewRow row;
    row.label = label + 1;
    row.transform = describe(set[label]);
    row.mean_intensity = im.mean();
    row.image = out_dir / ("transform_" + std::to_string(row.label) + ".png");
    save_image(im, row.image);
    csv << row.label << ",\"" << row.transform << "\"," << format_double(row.mean_intensity) << ","
        << row.image.filename().string() << "\n";
    rows.push_back(std::move(row));
  }
  write_file_atomic(out_dir / "preview.csv", csv.str());
  return rows;
}

std::vector<TrainedRun> cmd_train(const ExperimentConfig& config, const Log& log) {
  config.validate();
  const fs::path out = resolve_output_dir(config.output_dir);
  const auto manifest = resolve_dataset(config, log);
  const auto set = resolve_experiment_transforms(config, manifest.target_dims);
  std::vector<TrainedRun> runs;
  std::vector<fs::path> model_paths;
  for (int k = 0; k < config.runs; ++k) {
    const std::uint64_t seed = config.run_seed(k);
    const auto splits = make_splits(manifest, config.train_size, seed);
    ClassifierConfig cc{set.size(), manifest.target_dims, config.architecture, seed};
    emit(log, "run " + std::to_string(k) + ": seed " + std::to_string(seed) + ", " +
                  std::to_string(splits.train.size()) + " images x " + std::to_string(set.size()) + " transforms (" +
                  set.name() + ")");
    const auto model = train(splits.train.images, set, cc, config.train, manifest.content_hash,
                             [&](const EpochReport& r) {
                               emit(log, "  epoch " + std::to_string(r.epoch) + " loss " + format_double(r.loss));
                             });
    const fs::path dir = run_dir(out, k);
    TrainedRun run{k, seed, dir / files::kModel, model.record().loss_curve};
    save_model(model, run.model_path);
    write_file_atomic(dir / files::kLoss, loss_curve_csv(model.record()));
    model_paths.push_back(run.model_path);
    runs.push_back(std::move(run));
  }
  write_provenance(out, "train", config_to_json(config), manifest.content_hash, model_paths);
  return runs;
}

namespace {

std::vector<TrainedModel> load_checked(const std::vector<fs::path>& paths, const TransformSet& set, Dims dims) {
  std::vector<TrainedModel> models;
  for (const auto& p : paths) {
    auto m = load_model(p);
    if (m.n_classes() != set.size()) {
      throw DimensionError("model '" + p.string() + "' predicts " + std::to_string(m.n_classes()) +
                           " classes but transform set '" + set.name() + "' has " + std::to_string(set.size()));
    }
    if (m.input_dims() != dims) {
      throw DimensionError("model '" + p.string() + "' expects " + to_string(m.input_dims()) +
                           " images but the dataset is " + to_string(dims));
    }
    models.push_back(std::move(m));
  }
  return models;
}

}  // namespace

ScoreBatchResult cmd_score(const ExperimentConfig& config, const fs::path& model_path, const fs::path& out_csv,
                           const Log& log) {
  config.validate();
  const auto manifest = resolve_dataset(config, log);
  const auto set = resolve_experiment_transforms(config, manifest.target_dims);
  auto models = load_checked({model_path}, set, manifest.target_dims);
  const auto test = load_test_split(manifest);
  auto result = score_batch(models.front(), test, set);
  for (const auto& f : result.failures) emit(log, "failed to score " + f.sample_id + ": " + f.error);
  write_file_atomic(out_csv, scores_csv(result.reports));
  return result;
}

EvalReport cmd_evaluate(const ExperimentConfig& config, const std::vector<fs::path>& model_paths, const Log& log) {
  config.validate();
  if (model_paths.empty()) throw InvalidArgument("evaluate needs at least one model file");
  const fs::path out = resolve_output_dir(config.output_dir);
  const auto manifest = resolve_dataset(config, log);
  const auto set = resolve_experiment_transforms(config, manifest.target_dims);
  const auto models = load_checked(model_paths, set, manifest.target_dims);
  const auto test = load_test_split(manifest);

  std::vector<RunMetrics> per_run;
  std::ostringstream roc, pr;
  roc << "run,threshold,fpr,tpr\n";
  pr << "run,positive,threshold,recall,precision\n";
  std::size_t failures = 0;
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto result = score_batch(models[k], test, set);
    for (const auto& f : result.failures) emit(log, "failed to score " + f.sample_id + ": " + f.error);
    failures += result.failures.size();
    write_file_atomic(model_paths[k].parent_path() / files::kScores, scores_csv(result.reports));
    const auto ls = LabeledScores::from_reports(result.reports);
    per_run.push_back(evaluate(ls));
    for (const auto& p : roc_curve(ls)) {
      roc << k << "," << (std::isinf(p.threshold) ? std::string("inf") : format_double(p.threshold)) << ","
          << format_double(p.fpr) << "," << format_double(p.tpr) << "\n";
    }
    for (auto positive : {Positive::Majority, Positive::Minority}) {
      for (const auto& p : pr_curve(ls, positive)) {
        pr << k << "," << (positive == Positive::Majority ? "majority" : "minority") << ","
           << format_double(p.threshold) << "," << format_double(p.recall) << "," << format_double(p.precision)
           << "\n";
      }
    }
    emit(log, "run " + std::to_string(k) + ": AUC " + format_double(per_run.back().auc) + ", AUPR-maj " +
                  format_double(per_run.back().aupr_maj) + ", AUPR-min " + format_double(per_run.back().aupr_min));
  }
  const auto report = aggregate_runs(per_run);
  write_file_atomic(out / files::kMetrics, eval_report_json(report));
  write_file_atomic(out / files::kRoc, roc.str());
  write_file_atomic(out / files::kPr, pr.str());
  write_provenance(out, "evaluate", config_to_json(config), manifest.content_hash, model_paths,
                   json{{"score_failures", failures}});
  emit(log, "AUC " + format_percent(report.auc) + "  AUPR-maj " + format_percent(report.aupr_maj) + "  AUPR-min " +
                format_percent(report.aupr_min) + " (percent, mean±std over " + std::to_string(report.runs) +
                " runs)");
  return report;
}

EvalReport run_experiment(const ExperimentConfig& config, const Log& log) {
  const auto runs = cmd_train(config, log);
  std::vector<fs::path> paths;
  for (const auto& r : runs) paths.push_back(r.model_path);
  return cmd_evaluate(config, paths, log);
}

std::vector<ComparisonRow> cmd_compare_transforms(const ExperimentConfig& config,
                                                  const std::vector<std::string>& presets, const Log& log) {
  if (presets.empty()) throw InvalidArgument("compare-transforms needs at least one preset");
  const auto& names = preset_names();
  for (const auto& p : presets) {
    if (std::find(names.begin(), names.end(), p) == names.end()) preset(p);  // throws listing valid names
  }
  config.validate();
  const fs::path out = resolve_output_dir(config.output_dir);
  std::vector<ComparisonRow> rows;
  for (const auto& p : presets) {
    ExperimentConfig sub = config;
    sub.transform_set = p;
    sub.output_dir = out / slug(p);
    if (sub.dataset.synthetic && !sub.dataset.dir) sub.dataset.dir = out / "dataset";
    emit(log, "== " + p + " ==");
    ComparisonRow row;
    row.transform_set = p;
    row.report = run_experiment(sub, log);
    row.n = preset(p, 3).size();
    rows.push_back(std::move(row));
  }
  write_file_atomic(out / "comparison.csv", comparison_csv(rows));
  write_provenance(out, "compare-transforms", config_to_json(config), "", {}, json{{"presets", presets}});
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "transform_set,n," << kMetricHeader << "\n";
  for (const auto& r : rows) out << r.transform_set << "," << r.n << "," << metric_columns(r.report) << "\n";
  return out.str();
}

std::vector<SweepRow> cmd_size_sweep(const ExperimentConfig& config, const std::vector<std::size_t>& sizes,
                                     const Log& log) {
  if (sizes.empty()) throw InvalidArgument("size-sweep needs at least one size");
  config.validate();
  const fs::path out = resolve_output_dir(config.output_dir);
  std::vector<SweepRow> rows;
  for (std::size_t size : sizes) {
    ExperimentConfig sub = config;
    sub.train_size = size;
    sub.output_dir = out / ("size_" + std::to_string(size));
    if (sub.dataset.synthetic && !sub.dataset.dir) sub.dataset.dir = out / "dataset";
    emit(log, "== train_size " + std::to_string(size) + " ==");
    SweepRow row;
    row.train_size = size;
    try {
      row.report = run_experiment(sub, log);
    } catch (const Error& e) {
      row.error = e.what();
      emit(log, "train_size " + std::to_string(size) + " failed: " + row.error);
    }
    rows.push_back(std::move(row));
  }
  write_file_atomic(out / "sweep.csv", sweep_csv(rows));
  json sz = sizes;
  write_provenance(out, "size-sweep", config_to_json(config), "", {}, json{{"sizes", sz}});
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "train_size,status," << kMetricHeader << ",error\n";
  for (const auto& r : rows) {
    out << r.train_size << ",";
    if (r.report) {
      out << "ok," << metric_columns(*r.report) << ",";
    } else {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), '"', '\'');
      out << "error,,,,,,,,\"" << err << "\"";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace occ

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "occkit/classifier.hpp"
#include "occkit/dataio.hpp"
#include "occkit/error.hpp"
#include "occkit/evaluation.hpp"
#include "occkit/experiment.hpp"
#include "occkit/scoring.hpp"
#include "occkit/transforms.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (H, W) or (H, W, C) array -> planar Image.
occ::Image to_image(const Array& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw occ::DimensionError("expected an (H, W) or (H, W, C) array");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  occ::Image img(occ::Dims{h, w, c});
  auto r = a.unchecked();
  const double* src = a.data();
  (void)r;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) img.at(y, x, ch) = src[(static_cast<std::size_t>(y) * w + x) * c + ch];
    }
  }
  return img;
}

Array to_array(const occ::Image& img) {
  Array out({img.height(), img.width(), img.channels()});
  double* dst = out.mutable_data();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        dst[(static_cast<std::size_t>(y) * img.width() + x) * img.channels() + c] = img.at(y, x, c);
      }
    }
  }
  return out;
}

// (N, H, W[, C]) array or sequence of images.
std::vector<occ::Image> to_images(const py::object& obj) {
  std::vector<occ::Image> out;
  if (py::isinstance<py::array>(obj)) {
    Array a = obj.cast<Array>();
    if (a.ndim() != 3 && a.ndim() != 4) throw occ::DimensionError("expected an (N, H, W[, C]) array");
    for (py::ssize_t i = 0; i < a.shape(0); ++i) {
      out.push_back(to_image(obj.attr("__getitem__")(i).cast<Array>()));
    }
    return out;
  }
  for (const auto& item : obj) out.push_back(to_image(item.cast<Array>()));
  return out;
}

std::tuple<int, int, int> dims_tuple(const occ::Dims& d) { return {d.height, d.width, d.channels}; }

occ::Positive parse_positive(const std::string& s) {
  if (s == "majority") return occ::Positive::Majority;
  if (s == "minority") return occ::Positive::Minority;
  throw occ::InvalidArgument("positive must be 'majority' or 'minority'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "One-class image classification by transformation prediction";

  auto base = py::register_exception<occ::Error>(m, "Error");
  py::register_exception<occ::InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<occ::DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<occ::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<occ::IoError>(m, "IoError", base.ptr());
  py::register_exception<occ::CorruptFile>(m, "CorruptFile", base.ptr());
  py::register_exception<occ::VersionMismatch>(m, "VersionMismatch", base.ptr());
  py::register_exception<occ::NumericalError>(m, "NumericalError", base.ptr());

  // transforms
  m.def("apply_linear", [](const Array& img, double c, double b) {
    return to_array(occ::apply_linear(to_image(img), occ::LinearMagnification{c, b}));
  }, py::arg("image"), py::arg("c"), py::arg("b") = 0.0);
  m.def("apply_shift", [](const Array& img, int dx, int dy) {
    return to_array(occ::apply_geometric(to_image(img), occ::Shift{dx, dy}));
  }, py::arg("image"), py::arg("dx"), py::arg("dy"));
  m.def("apply_rotation", [](const Array& img, int angle) {
    return to_array(occ::apply_geometric(to_image(img), occ::Rotation{angle}));
  }, py::arg("image"), py::arg("angle"));

  py::class_<occ::TransformSet>(m, "TransformSet")
      .def_property_readonly("name", &occ::TransformSet::name)
      .def_property_readonly("identity_index", &occ::TransformSet::identity_index)
      .def("__len__", &occ::TransformSet::size)
      .def("describe", [](const occ::TransformSet& s) {
        std::vector<std::string> out;
        for (const auto& spec : s.specs()) out.push_back(occ::describe(spec));
        return out;
      })
      .def("to_json", &occ::transform_set_to_json)
      .def("__repr__", [](const occ::TransformSet& s) {
        return "<TransformSet " + s.name() + " n=" + std::to_string(s.size()) + ">";
      });
  m.def("preset", [](const std::string& name, int side) { return occ::preset(name, side); }, py::arg("name"),
        py::arg("image_side") = 0);
  m.def("preset_names", &occ::preset_names);
  m.def("parse_transform_set", [](const std::string& text) { return occ::parse_transform_set(text); });
  m.def("load_transform_set", &occ::load_transform_set);
  m.def("expand", [](const Array& img, const occ::TransformSet& set) {
    std::vector<std::pair<Array, int>> out;
    for (auto& [im, label] : occ::expand(to_image(img), set)) out.emplace_back(to_array(im), label);
    return out;
  }, "Transformed counterparts with 0-based labels, in set order.");

  // dataio
  py::class_<occ::SyntheticConfig>(m, "SyntheticConfig")
      .def(py::init<>())
      .def_readwrite("n_majority", &occ::SyntheticConfig::n_majority)
      .def_readwrite("n_minority", &occ::SyntheticConfig::n_minority)
      .def_readwrite("n_train", &occ::SyntheticConfig::n_train)
      .def_property("dims", [](const occ::SyntheticConfig& c) { return dims_tuple(c.dims); },
                    [](occ::SyntheticConfig& c, std::tuple<int, int, int> d) {
                      c.dims = occ::Dims{std::get<0>(d), std::get<1>(d), std::get<2>(d)};
                    })
      .def_readwrite("brightness_shift", &occ::SyntheticConfig::brightness_shift)
      .def_readwrite("contrast_shift", &occ::SyntheticConfig::contrast_shift)
      .def_readwrite("texture_seed", &occ::SyntheticConfig::texture_seed);
  m.def("generate_synthetic", [](const occ::SyntheticConfig& c) {
    const auto ds = occ::generate_synthetic(c);
    py::list images, ids, classes, splits;
    for (const auto& s : ds.samples) {
      images.append(to_array(s.image));
      ids.append(s.id);
      classes.append(s.class_id);
      splits.append(s.split == occ::Split::Train ? "train" : "test");
    }
    py::dict out;
    out["images"] = images;
    out["ids"] = ids;
    out["class_ids"] = classes;
    out["splits"] = splits;
    out["warnings"] = ds.warnings;
    return out;
  });
  m.def("synthesize", [](const occ::SyntheticConfig& c, const std::filesystem::path& dir) {
    return occ::synthesize(c, dir).manifest_path;
  });
  m.def("load_image", [](const std::filesystem::path& p, std::tuple<int, int, int> d) {
    return to_array(occ::load_image(p, occ::Dims{std::get<0>(d), std::get<1>(d), std::get<2>(d)}));
  });

  // classifier
  py::class_<occ::TrainedModel>(m, "TrainedModel")
      .def_property_readonly("n_classes", &occ::TrainedModel::n_classes)
      .def_property_readonly("input_dims", [](const occ::TrainedModel& mdl) { return dims_tuple(mdl.input_dims()); })
      .def_property_readonly("loss_curve", [](const occ::TrainedModel& mdl) { return mdl.record().loss_curve; })
      .def_property_readonly("transforms", &occ::TrainedModel::transforms)
      .def("model_id", &occ::TrainedModel::model_id)
      .def("predict_proba", [](const occ::TrainedModel& mdl, const py::object& images) {
        const auto imgs = to_images(images);
        py::gil_scoped_release release;
        return mdl.predict_proba(std::span<const occ::Image>(imgs));
      });
  m.def(
      "train",
      [](const py::object& images, const occ::TransformSet& set, const std::string& architecture, std::uint64_t seed,
         double learning_rate, int batch_size, int epochs) {
        const auto imgs = to_images(images);
        if (imgs.empty()) throw occ::InvalidArgument("training set is empty");
        occ::ClassifierConfig cc{set.size(), imgs.front().dims(), occ::Architecture::parse(architecture), seed};
        occ::TrainConfig tc{learning_rate, batch_size, epochs};
        py::gil_scoped_release release;
        return occ::train(imgs, set, cc, tc);
      },
      py::arg("images"), py::arg("transform_set"), py::arg("architecture") = "small_conv", py::arg("seed") = 0,
      py::arg("learning_rate") = 0.0002, py::arg("batch_size") = 128, py::arg("epochs") = 50);
  m.def("save_model", &occ::save_model);
  m.def("load_model", &occ::load_model);

  // scoring
  m.def("probability_matrix", [](const occ::TrainedModel& mdl, const Array& img, const occ::TransformSet& set) {
    const auto p = occ::probability_matrix(mdl, to_image(img), set);
    Array out({p.size(), p.size()});
    std::copy(p.values().begin(), p.values().end(), out.mutable_data());
    return out;
  });
  m.def("score", [](const Array& p) {
    if (p.ndim() != 2 || p.shape(0) != p.shape(1)) throw occ::DimensionError("expected a square matrix");
    const int n = static_cast<int>(p.shape(0));
    return occ::score(occ::ProbabilityMatrix(n, std::vector<double>(p.data(), p.data() + n * n)));
  }, "Sum of the diagonal of a row-stochastic matrix.");
  m.def("score_images", [](const occ::TrainedModel& mdl, const py::object& images, const occ::TransformSet& set) {
    occ::SampleBatch batch;
    auto imgs = to_images(images);
    for (std::size_t i = 0; i < imgs.size(); ++i) batch.push_back(std::move(imgs[i]), 0, std::to_string(i));
    py::gil_scoped_release release;
    const auto result = occ::score_batch(mdl, batch, set, false);
    std::vector<double> scores;
    for (const auto& r : result.reports) scores.push_back(r.score);
    return scores;
  });

  // evaluation
  auto labeled = [](const std::vector<double>& s, const std::vector<bool>& maj) {
    return occ::LabeledScores{s, maj};
  };
  m.def("auc", [labeled](const std::vector<double>& s, const std::vector<bool>& maj) { return occ::auc(labeled(s, maj)); },
        py::arg("scores"), py::arg("is_majority"));
  m.def("aupr", [labeled](const std::vector<double>& s, const std::vector<bool>& maj, const std::string& positive) {
    return occ::aupr(labeled(s, maj), parse_positive(positive));
  }, py::arg("scores"), py::arg("is_majority"), py::arg("positive") = "majority");
  m.def("aggregate", [](const std::vector<double>& values) {
    const auto s = occ::summarize(values);
    return std::make_tuple(s.mean, s.std);
  }, "Mean and population standard deviation.");

  // experiments
  m.def("run_experiment", [](const std::filesystem::path& config_path) {
    const auto cfg = occ::load_experiment_config(config_path);
    const auto r = occ::run_experiment(cfg);
    py::dict out;
    out["auc"] = py::make_tuple(r.auc.mean, r.auc.std);
    out["aupr_maj"] = py::make_tuple(r.aupr_maj.mean, r.aupr_maj.std);
    out["aupr_min"] = py::make_tuple(r.aupr_min.mean, r.aupr_min.std);
    out["runs"] = r.runs;
    return out;
  });
}

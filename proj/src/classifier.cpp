#include "occkit/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "occkit/error.hpp"
#include "occkit/io_util.hpp"

namespace occ {
namespace {

constexpr char kMagic[8] = {'O', 'C', 'C', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kPredictChunk = 256;

}  // namespace

void ClassifierConfig::validate() const {
  if (n_classes < 2) throw InvalidArgument("n_classes must be >= 2");
  if (input_dims.height < 1 || input_dims.width < 1 || input_dims.channels < 1) {
    throw InvalidArgument("invalid input dims " + to_string(input_dims));
  }
  architecture.validate();
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning_rate must be positive");
  }
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
}

TrainedModel::TrainedModel(ClassifierConfig config, TrainConfig train_config, TransformSet transforms,
                           TrainingRecord record, nn::Network network)
    : config_(std::move(config)), train_config_(train_config), transforms_(std::move(transforms)),
      record_(std::move(record)), network_(std::make_unique<nn::Network>(std::move(network))) {
  if (transforms_.size() != config_.n_classes) {
    throw DimensionError("model has " + std::to_string(config_.n_classes) + " classes but its transform set has " +
                         std::to_string(transforms_.size()));
  }
}

std::vector<std::vector<double>> TrainedModel::predict_proba(std::span<const Image* const> images) const {
  for (const Image* im : images) {
    if (im->dims() != config_.input_dims) {
      throw DimensionError("model expects " + to_string(config_.input_dims) + " images, got " +
                           to_string(im->dims()));
    }
  }
  std::vector<std::vector<double>> out;
  out.reserve(images.size());
  for (std::size_t begin = 0; begin < images.size(); begin += kPredictChunk) {
    const std::size_t end = std::min(images.size(), begin + kPredictChunk);
    const nn::Matrix probs = network_->predict_proba(nn::pack(images.subspan(begin, end - begin)));
    for (Eigen::Index n = 0; n < probs.cols(); ++n) {
      std::vector<double> v(probs.rows());
      for (Eigen::Index k = 0; k < probs.rows(); ++k) v[k] = probs(k, n);
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<std::vector<double>> ProbabilityModel::predict_proba(std::span<const Image> images) const {
  std::vector<const Image*> ptrs;
  ptrs.reserve(images.size());
  for (const auto& im : images) ptrs.push_back(&im);
  return predict_proba(std::span<const Image* const>(ptrs));
}

std::string TrainedModel::model_id() const {
  const auto state = network_->state();
  return sha256_hex(std::string_view(reinterpret_cast<const char*>(state.data()), state.size() * sizeof(double)))
      .substr(0, 16);
}

TrainedModel train(std::span<const Image> train_images, const TransformSet& set, const ClassifierConfig& config,
                   const TrainConfig& train_config, const std::string& dataset_hash,
                   const std::function<void(const EpochReport&)>& on_epoch) {
  config.validate();
  train_config.validate();
  if (train_images.empty()) throw InvalidArgument("training set is empty");
  if (config.n_classes != set.size()) {
    throw DimensionError("classifier has " + std::to_string(config.n_classes) + " classes but transform set '" +
                         set.name() + "' has " + std::to_string(set.size()));
  }
  for (const auto& im : train_images) {
    if (im.dims() != config.input_dims) {
      throw DimensionError("training image dims " + to_string(im.dims()) + " != classifier input dims " +
                           to_string(config.input_dims));
    }
  }

  nn::Network net(config.architecture, config.input_dims, config.n_classes, config.seed);
  nn::Adam optimizer(train_config.learning_rate);
  const auto params = net.parameters();

  const int n = set.size();
  const std::size_t n_pairs = train_images.size() * static_cast<std::size_t>(n);
  std::vector<std::size_t> order(n_pairs);
  std::iota(order.begin(), order.end(), 0);
  // Shuffling uses its own stream so that weight init and data order are
  // independently reproducible from the one seed.
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainingRecord record;
  record.seed = config.seed;
  record.dataset_hash = dataset_hash;
  record.n_train_images = train_images.size();
  record.n_train_pairs = n_pairs;

  std::vector<Image> batch_images;
  std::vector<int> batch_labels;
  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    for (std::size_t begin = 0; begin < n_pairs; begin += train_config.batch_size) {
      const std::size_t end = std::min(n_pairs, begin + static_cast<std::size_t>(train_config.batch_size));
      batch_images.clear();
      batch_labels.clear();
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t image = order[i] / n;
        const int label = static_cast<int>(order[i] % n);
        batch_images.push_back(apply(train_images[image], set[label]));
        batch_labels.push_back(label);
      }
      const double loss = net.loss_and_gradient(nn::pack(batch_images), batch_labels);
      if (!std::isfinite(loss)) {
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) + ", pair " +
                             std::to_string(begin) + " (learning rate " + format_double(train_config.learning_rate) +
                             ", batch size " + std::to_string(train_config.batch_size) + ")");
      }
      optimizer.step(params);
      total += loss * static_cast<double>(end - begin);
    }
    record.loss_curve.push_back(total / static_cast<double>(n_pairs));
    if (on_epoch) on_epoch(EpochReport{epoch, record.loss_curve.back()});
  }
  return TrainedModel(config, train_config, set, std::move(record), std::move(net));
}

namespace {

nlohmann::json header_json(const TrainedModel& m) {
  const auto& c = m.config();
  const auto& r = m.record();
  return nlohmann::json{
      {"n_classes", c.n_classes},
      {"input_dims", to_string(c.input_dims)},
      {"architecture", c.architecture.describe()},
      {"seed", c.seed},
      {"learning_rate", m.train_config().learning_rate},
      {"batch_size", m.train_config().batch_size},
      {"epochs", m.train_config().epochs},
      {"transform_set", nlohmann::json::parse(transform_set_to_json(m.transforms()))},
      {"dataset_hash", r.dataset_hash},
      {"n_train_images", r.n_train_images},
      {"n_train_pairs", r.n_train_pairs},
      {"loss_curve", r.loss_curve},
  };
}

template <class T>
void put(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}
  void read(void* dst, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw CorruptFile("model file '" + source_ + "' is truncated");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  template <class T>
  T get() {
    T v;
    read(&v, sizeof(T));
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::string out(kMagic, sizeof(kMagic));
  put(out, kFormatVersion);
  const std::string header = header_json(model).dump();
  put(out, static_cast<std::uint64_t>(header.size()));
  out += header;
  const auto state = model.network().state();
  put(out, static_cast<std::uint64_t>(state.size()));
  out.append(reinterpret_cast<const char*>(state.data()), state.size() * sizeof(double));
  const std::string digest = sha256_hex(out);
  out += digest.substr(0, 32);
  write_file_atomic(path, out);
}

TrainedModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("model file not found: " + path.string());
  const std::string bytes = read_file(path);
  const std::string src = path.string();
  Reader in(bytes, src);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw CorruptFile("'" + src + "' is not a model file");
  const auto version = in.get<std::uint32_t>();
  if (version != kFormatVersion) {
    throw VersionMismatch("model file '" + src + "' has format version " + std::to_string(version) +
                          ", this build reads version " + std::to_string(kFormatVersion));
  }
  const auto header_len = in.get<std::uint64_t>();
  if (header_len > bytes.size()) throw CorruptFile("model file '" + src + "' is truncated");
  std::string header(header_len, '\0');
  in.read(header.data(), header_len);
  const auto count = in.get<std::uint64_t>();
  if (count > bytes.size() / sizeof(double)) throw CorruptFile("model file '" + src + "' is truncated");
  std::vector<double> state(count);
  in.read(state.data(), count * sizeof(double));
  const std::size_t body = in.pos();
  std::string digest(32, '\0');
  in.read(digest.data(), digest.size());
  if (in.pos() != bytes.size() || sha256_hex(std::string_view(bytes).substr(0, body)).substr(0, 32) != digest) {
    throw CorruptFile("model file '" + src + "' failed its checksum");
  }

  try {
    const auto h = nlohmann::json::parse(header);
    ClassifierConfig config;
    config.n_classes = h.at("n_classes").get<int>();
    config.input_dims = parse_dims(h.at("input_dims").get<std::string>());
    config.architecture = Architecture::parse(h.at("architecture").get<std::string>());
    config.seed = h.at("seed").get<std::uint64_t>();
    TrainConfig tc;
    tc.learning_rate = h.at("learning_rate").get<double>();
    tc.batch_size = h.at("batch_size").get<int>();
    tc.epochs = h.at("epochs").get<int>();
    TrainingRecord record;
    record.seed = config.seed;
    record.dataset_hash = h.at("dataset_hash").get<std::string>();
    record.n_train_images = h.at("n_train_images").get<std::size_t>();
    record.n_train_pairs = h.at("n_train_pairs").get<std::size_t>();
    record.loss_curve = h.at("loss_curve").get<std::vector<double>>();
    TransformSet set = parse_transform_set(h.at("transform_set").dump(), src);
    nn::Network net(config.architecture, config.input_dims, config.n_classes, config.seed);
    if (net.state_size() != state.size()) {
      throw CorruptFile("model file '" + src + "' holds " + std::to_string(state.size()) +
                        " values, architecture needs " + std::to_string(net.state_size()));
    }
    net.load_state(state);
    return TrainedModel(config, tc, std::move(set), std::move(record), std::move(net));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile("model file '" + src + "' has a malformed header: " + e.what());
  }
}

std::string loss_curve_csv(const TrainingRecord& record) {
  std::ostringstream out;
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < record.loss_curve.size(); ++i) {
    out << (i + 1) << "," << format_double(record.loss_curve[i]) << "\n";
  }
  return out.str();
}

}  // namespace occ

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "occkit/image.hpp"
#include "occkit/network.hpp"
#include "occkit/transforms.hpp"

namespace occ {

using nn::Architecture;

struct ClassifierConfig {
  int n_classes = 0;
  Dims input_dims;
  Architecture architecture;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainConfig {
  double learning_rate = 0.0002;
  int batch_size = 128;
  int epochs = 50;

  void validate() const;
};

struct TrainingRecord {
  std::vector<double> loss_curve;  // mean training cross-entropy per epoch
  std::uint64_t seed = 0;
  std::string dataset_hash;
  std::size_t n_train_images = 0;
  std::size_t n_train_pairs = 0;
};

// Anything that maps images to per-image class distributions.
class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;
  virtual int n_classes() const = 0;
  virtual Dims input_dims() const = 0;
  // One probability vector (length n_classes) per image, in input order.
  virtual std::vector<std::vector<double>> predict_proba(std::span<const Image* const> images) const = 0;
  virtual std::string model_id() const = 0;

  std::vector<std::vector<double>> predict_proba(std::span<const Image> images) const;
};

class TrainedModel final : public ProbabilityModel {
 public:
  TrainedModel(ClassifierConfig config, TrainConfig train_config, TransformSet transforms,
               TrainingRecord record, nn::Network network);

  const ClassifierConfig& config() const { return config_; }
  const TrainConfig& train_config() const { return train_config_; }
  const TransformSet& transforms() const { return transforms_; }
  const TrainingRecord& record() const { return record_; }
  int n_classes() const override { return config_.n_classes; }
  Dims input_dims() const override { return config_.input_dims; }

  using ProbabilityModel::predict_proba;
  std::vector<std::vector<double>> predict_proba(std::span<const Image* const> images) const override;

  // Short content hash of the learned state.
  std::string model_id() const override;

  const nn::Network& network() const { return *network_; }
  nn::Network& network() { return *network_; }

 private:
  ClassifierConfig config_;
  TrainConfig train_config_;
  TransformSet transforms_;
  TrainingRecord record_;
  std::unique_ptr<nn::Network> network_;
};

struct EpochReport {
  int epoch = 0;  // 1-based
  double loss = 0.0;
};

// Trains on every (image, transform) pair of the expanded set with per-epoch
// seeded shuffling, Adam and cross-entropy.
TrainedModel train(std::span<const Image> train_images, const TransformSet& set,
                   const ClassifierConfig& config, const TrainConfig& train_config,
                   const std::string& dataset_hash = {},
                   const std::function<void(const EpochReport&)>& on_epoch = {});

// Binary layout (native little-endian):
//   "OCCMODEL" | u32 version | u64 header length | header JSON |
//   u64 value count | f64 values | 32-byte SHA-256 of everything before it
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

// Delimited loss log: "epoch,loss" header then one row per epoch.
std::string loss_curve_csv(const TrainingRecord& record);

}  // namespace occ

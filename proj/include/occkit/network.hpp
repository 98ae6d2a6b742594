#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "occkit/image.hpp"

namespace occ::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Batch of feature maps. Row c of `data` holds channel c for every sample,
// laid out as [sample][y][x]; i.e. column index n * H * W + y * W + x.
struct Tensor {
  Matrix data;
  int batch = 0;
  int height = 0;
  int width = 0;

  int channels() const { return static_cast<int>(data.rows()); }
  int spatial() const { return height * width; }
};

// Packs images (all with identical dims) into a Tensor.
Tensor pack(std::span<const Image> images);
Tensor pack(std::span<const Image* const> images);

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

class Layer {
 public:
  virtual ~Layer() = default;
  // Inference pass; no state is touched.
  virtual Tensor forward(const Tensor& x) const = 0;
  // Training pass; caches what backward() needs.
  virtual Tensor forward_train(const Tensor& x) = 0;
  // Accumulates parameter gradients and returns the input gradient.
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual void parameters(std::vector<Parameter*>&) {}
  // Non-trainable state that must be serialized (running statistics).
  virtual void buffers(std::vector<Matrix*>&) {}
};

struct Architecture {
  enum class Kind { SmallConv, WideResidual };
  Kind kind = Kind::SmallConv;
  int depth = 16;        // wide_residual only; (depth - 4) must be divisible by 6
  int width_factor = 4;  // wide_residual: widening factor; small_conv: base channels / 4

  static Architecture small_conv(int width_factor = 4) { return {Kind::SmallConv, 0, width_factor}; }
  static Architecture wide_residual(int depth, int width_factor) {
    return {Kind::WideResidual, depth, width_factor};
  }
  std::string describe() const;
  static Architecture parse(const std::string& text);  // "small_conv", "wide_residual(16,4)"
  void validate() const;
  bool operator==(const Architecture&) const = default;
};

class Network {
 public:
  Network(const Architecture& arch, Dims input, int n_classes, std::uint64_t seed);

  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  int n_classes() const { return n_classes_; }
  Dims input_dims() const { return input_; }
  const Architecture& architecture() const { return arch_; }

  // Logits, one column per sample: (n_classes x batch).
  Matrix logits(const Tensor& x) const;
  // Softmax probabilities, one column per sample.
  Matrix predict_proba(const Tensor& x) const;

  // Mean cross-entropy of the inference-mode forward pass.
  double loss(const Tensor& x, std::span<const int> labels) const;

  // Training-mode forward + backward. Overwrites every parameter's grad with
  // d(mean cross-entropy)/d(param) and returns the loss.
  double loss_and_gradient(const Tensor& x, std::span<const int> labels);

  std::vector<Parameter*> parameters();
  std::size_t parameter_count();

  // Parameters followed by buffers, in layer order.
  std::vector<double> state() const;
  void load_state(std::span<const double> values);
  std::size_t state_size() const;

 private:
  Architecture arch_;
  Dims input_;
  int n_classes_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Column-wise softmax.
Matrix softmax(const Matrix& logits);

// Adam with Keras defaults for the moment decay rates and epsilon.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-7);
  void step(std::span<Parameter* const> params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace occ::nn

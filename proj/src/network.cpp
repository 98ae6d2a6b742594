#include "occkit/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <regex>

#include "occkit/error.hpp"

namespace occ::nn {
namespace {

// Upper bound on im2col scratch entries per chunk (~32 MB of doubles).
constexpr std::size_t kIm2colBudget = std::size_t{1} << 22;

void he_normal(Matrix& w, int fan_in, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
}

Parameter make_param(std::string name, Eigen::Index rows, Eigen::Index cols) {
  return Parameter{std::move(name), Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)};
}

class Conv2d final : public Layer {
 public:
  Conv2d(int in_c, int out_c, int kernel, int stride, int pad, bool bias, std::mt19937_64& rng,
         const std::string& name)
      : in_c_(in_c), out_c_(out_c), k_(kernel), stride_(stride), pad_(pad), has_bias_(bias),
        w_(make_param(name + ".weight", out_c, in_c * kernel * kernel)),
        b_(make_param(name + ".bias", out_c, 1)) {
    he_normal(w_.value, in_c * kernel * kernel, rng);
  }

  Tensor forward(const Tensor& x) const override {
    Tensor y;
    y.batch = x.batch;
    y.height = out_size(x.height);
    y.width = out_size(x.width);
    const int ohw = y.spatial();
    y.data.resize(out_c_, static_cast<Eigen::Index>(x.batch) * ohw);
    const int chunk = chunk_size(y.height, y.width);
    Matrix cols;
    for (int n0 = 0; n0 < x.batch; n0 += chunk) {
      const int cn = std::min(chunk, x.batch - n0);
      im2col(x, n0, cn, y.height, y.width, cols);
      y.data.middleCols(static_cast<Eigen::Index>(n0) * ohw, static_cast<Eigen::Index>(cn) * ohw).noalias() =
          w_.value * cols;
    }
    if (has_bias_) y.data.colwise() += b_.value.col(0);
    return y;
  }

  Tensor forward_train(const Tensor& x) override {
    input_ = x;
    return forward(x);
  }

  Tensor backward(const Tensor& dy) override {
    const Tensor& x = input_;
    Tensor dx;
    dx.batch = x.batch;
    dx.height = x.height;
    dx.width = x.width;
    dx.data = Matrix::Zero(in_c_, x.data.cols());
    const int ohw = dy.spatial();
    const int chunk = chunk_size(dy.height, dy.width);
    Matrix cols, dcols;
    for (int n0 = 0; n0 < x.batch; n0 += chunk) {
      const int cn = std::min(chunk, x.batch - n0);
      im2col(x, n0, cn, dy.height, dy.width, cols);
      const auto dy_chunk =
          dy.data.middleCols(static_cast<Eigen::Index>(n0) * ohw, static_cast<Eigen::Index>(cn) * ohw);
      w_.grad.noalias() += dy_chunk * cols.transpose();
      dcols.noalias() = w_.value.transpose() * dy_chunk;
      col2im(dcols, n0, cn, dy.height, dy.width, dx);
    }
    if (has_bias_) b_.grad.col(0) += dy.data.rowwise().sum();
    return dx;
  }

  void parameters(std::vector<Parameter*>& out) override {
    out.push_back(&w_);
    if (has_bias_) out.push_back(&b_);
  }

 private:
  int out_size(int in) const { return (in + 2 * pad_ - k_) / stride_ + 1; }

  int chunk_size(int oh, int ow) const {
    const std::size_t per_sample = static_cast<std::size_t>(in_c_) * k_ * k_ * oh * ow;
    return static_cast<int>(std::max<std::size_t>(1, kIm2colBudget / std::max<std::size_t>(1, per_sample)));
  }

  void im2col(const Tensor& x, int n0, int cn, int oh, int ow, Matrix& cols) const {
    const int ohw = oh * ow;
    const int hw = x.spatial();
    cols.resize(static_cast<Eigen::Index>(in_c_) * k_ * k_, static_cast<Eigen::Index>(cn) * ohw);
    for (int c = 0; c < in_c_; ++c) {
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx) {
          double* row = cols.row((c * k_ + ky) * k_ + kx).data();
          for (int n = 0; n < cn; ++n) {
            const double* src = x.data.row(c).data() + static_cast<std::size_t>(n0 + n) * hw;
            double* dst = row + static_cast<std::size_t>(n) * ohw;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride_ + ky - pad_;
              double* out = dst + oy * ow;
              if (iy < 0 || iy >= x.height) {
                std::fill(out, out + ow, 0.0);
                continue;
              }
              const double* in_row = src + iy * x.width;
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox * stride_ + kx - pad_;
                out[ox] = (ix >= 0 && ix < x.width) ? in_row[ix] : 0.0;
              }
            }
          }
        }
      }
    }
  }

  void col2im(const Matrix& dcols, int n0, int cn, int oh, int ow, Tensor& dx) const {
    const int ohw = oh * ow;
    const int hw = dx.spatial();
    for (int c = 0; c < in_c_; ++c) {
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx) {
          const double* row = dcols.row((c * k_ + ky) * k_ + kx).data();
          for (int n = 0; n < cn; ++n) {
            double* dst = dx.data.row(c).data() + static_cast<std::size_t>(n0 + n) * hw;
            const double* src = row + static_cast<std::size_t>(n) * ohw;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride_ + ky - pad_;
              if (iy < 0 || iy >= dx.height) continue;
              double* in_row = dst + iy * dx.width;
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox * stride_ + kx - pad_;
                if (ix >= 0 && ix < dx.width) in_row[ix] += src[oy * ow + ox];
              }
            }
          }
        }
      }
    }
  }

  int in_c_, out_c_, k_, stride_, pad_;
  bool has_bias_;
  Parameter w_, b_;
  Tensor input_;
};

class Relu final : public Layer {
 public:
  Tensor forward(const Tensor& x) const override {
    Tensor y = x;
    y.data = y.data.cwiseMax(0.0);
    return y;
  }
  Tensor forward_train(const Tensor& x) override {
    input_ = x.data;
    return forward(x);
  }
  Tensor backward(const Tensor& dy) override {
    Tensor dx = dy;
    dx.data = (input_.array() > 0.0).select(dy.data, 0.0);
    return dx;
  }

 private:
  Matrix input_;
};

// 2x2 average pooling with stride 2; odd trailing rows/columns are dropped.
class AvgPool2 final : public Layer {
 public:
  Tensor forward(const Tensor& x) const override {
    Tensor y;
    y.batch = x.batch;
    y.height = x.height / 2;
    y.width = x.width / 2;
    y.data.resize(x.channels(), static_cast<Eigen::Index>(x.batch) * y.spatial());
    for (int c = 0; c < x.channels(); ++c) {
      for (int n = 0; n < x.batch; ++n) {
        const double* src = x.data.row(c).data() + static_cast<std::size_t>(n) * x.spatial();
        double* dst = y.data.row(c).data() + static_cast<std::size_t>(n) * y.spatial();
        for (int oy = 0; oy < y.height; ++oy) {
          const double* r0 = src + 2 * oy * x.width;
          const double* r1 = r0 + x.width;
          for (int ox = 0; ox < y.width; ++ox) {
            dst[oy * y.width + ox] = 0.25 * (r0[2 * ox] + r0[2 * ox + 1] + r1[2 * ox] + r1[2 * ox + 1]);
          }
        }
      }
    }
    return y;
  }
  Tensor forward_train(const Tensor& x) override {
    in_h_ = x.height;
    in_w_ = x.width;
    return forward(x);
  }
  Tensor backward(const Tensor& dy) override {
    Tensor dx;
    dx.batch = dy.batch;
    dx.height = in_h_;
    dx.width = in_w_;
    dx.data = Matrix::Zero(dy.channels(), static_cast<Eigen::Index>(dy.batch) * dx.spatial());
    for (int c = 0; c < dy.channels(); ++c) {
      for (int n = 0; n < dy.batch; ++n) {
        const double* src = dy.data.row(c).data() + static_cast<std::size_t>(n) * dy.spatial();
        double* dst = dx.data.row(c).data() + static_cast<std::size_t>(n) * dx.spatial();
        for (int oy = 0; oy < dy.height; ++oy) {
          double* r0 = dst + 2 * oy * dx.width;
          double* r1 = r0 + dx.width;
          for (int ox = 0; ox < dy.width; ++ox) {
            const double g = 0.25 * src[oy * dy.width + ox];
            r0[2 * ox] += g;
            r0[2 * ox + 1] += g;
            r1[2 * ox] += g;
            r1[2 * ox + 1] += g;
          }
        }
      }
    }
    return dx;
  }

 private:
  int in_h_ = 0, in_w_ = 0;
};

class GlobalAvgPool final : public Layer {
 public:
  Tensor forward(const Tensor& x) const override {
    Tensor y;
    y.batch = x.batch;
    y.height = 1;
    y.width = 1;
    y.data.resize(x.channels(), x.batch);
    const int hw = x.spatial();
    for (int c = 0; c < x.channels(); ++c) {
      for (int n = 0; n < x.batch; ++n) {
        y.data(c, n) = x.data.row(c).segment(static_cast<Eigen::Index>(n) * hw, hw).mean();
      }
    }
    return y;
  }
  Tensor forward_train(const Tensor& x) override {
    in_h_ = x.height;
    in_w_ = x.width;
    return forward(x);
  }
  Tensor backward(const Tensor& dy) override {
    Tensor dx;
    dx.batch = dy.batch;
    dx.height = in_h_;
    dx.width = in_w_;
    const int hw = dx.spatial();
    dx.data.resize(dy.channels(), static_cast<Eigen::Index>(dy.batch) * hw);
    for (int c = 0; c < dy.channels(); ++c) {
      for (int n = 0; n < dy.batch; ++n) {
        dx.data.row(c).segment(static_cast<Eigen::Index>(n) * hw, hw).setConstant(dy.data(c, n) / hw);
      }
    }
    return dx;
  }

 private:
  int in_h_ = 0, in_w_ = 0;
};

// Fully connected layer on 1x1 feature maps.
class Dense final : public Layer {
 public:
  Dense(int in, int out, std::mt19937_64& rng, const std::string& name)
      : w_(make_param(name + ".weight", out, in)), b_(make_param(name + ".bias", out, 1)) {
    he_normal(w_.value, in, rng);
  }
  Tensor forward(const Tensor& x) const override {
    Tensor y;
    y.batch = x.batch;
    y.height = 1;
    y.width = 1;
    y.data.noalias() = w_.value * x.data;
    y.data.colwise() += b_.value.col(0);
    return y;
  }
  Tensor forward_train(const Tensor& x) override {
    input_ = x.data;
    return forward(x);
  }
  Tensor backward(const Tensor& dy) override {
    w_.grad.noalias() += dy.data * input_.transpose();
    b_.grad.col(0) += dy.data.rowwise().sum();
    Tensor dx;
    dx.batch = dy.batch;
    dx.height = 1;
    dx.width = 1;
    dx.data.noalias() = w_.value.transpose() * dy.data;
    return dx;
  }
  void parameters(std::vector<Parameter*>& out) override {
    out.push_back(&w_);
    out.push_back(&b_);
  }

 private:
  Parameter w_, b_;
  Matrix input_;
};

// Per-channel batch normalization; running statistics for inference.
class BatchNorm final : public Layer {
 public:
  BatchNorm(int channels, const std::string& name)
      : gamma_(make_param(name + ".gamma", channels, 1)), beta_(make_param(name + ".beta", channels, 1)),
        running_mean_(Matrix::Zero(channels, 1)), running_var_(Matrix::Ones(channels, 1)) {
    gamma_.value.setOnes();
  }

  Tensor forward(const Tensor& x) const override {
    Tensor y = x;
    for (int c = 0; c < x.channels(); ++c) {
      const double scale = gamma_.value(c, 0) / std::sqrt(running_var_(c, 0) + kEps);
      const double shift = beta_.value(c, 0) - running_mean_(c, 0) * scale;
      y.data.row(c).array() = x.data.row(c).array() * scale + shift;
    }
    return y;
  }

  Tensor forward_train(const Tensor& x) override {
    const auto m = static_cast<double>(x.data.cols());
    Tensor y = x;
    xhat_.resize(x.data.rows(), x.data.cols());
    inv_std_.resize(x.channels());
    for (int c = 0; c < x.channels(); ++c) {
      const double mean = x.data.row(c).mean();
      const double var = (x.data.row(c).array() - mean).square().sum() / m;
      inv_std_[c] = 1.0 / std::sqrt(var + kEps);
      xhat_.row(c).array() = (x.data.row(c).array() - mean) * inv_std_[c];
      y.data.row(c).array() = xhat_.row(c).array() * gamma_.value(c, 0) + beta_.value(c, 0);
      running_mean_(c, 0) = kMomentum * running_mean_(c, 0) + (1.0 - kMomentum) * mean;
      const double unbiased = m > 1 ? var * m / (m - 1) : var;
      running_var_(c, 0) = kMomentum * running_var_(c, 0) + (1.0 - kMomentum) * unbiased;
    }
    return y;
  }

  Tensor backward(const Tensor& dy) override {
    Tensor dx = dy;
    const auto m = static_cast<double>(dy.data.cols());
    for (int c = 0; c < dy.channels(); ++c) {
      const auto g = dy.data.row(c).array();
      const auto xh = xhat_.row(c).array();
      const double sum_g = g.sum();
      const double sum_gx = (g * xh).sum();
      gamma_.grad(c, 0) += sum_gx;
      beta_.grad(c, 0) += sum_g;
      dx.data.row(c).array() = (gamma_.value(c, 0) * inv_std_[c] / m) * (m * g - sum_g - xh * sum_gx);
    }
    return dx;
  }

  void parameters(std::vector<Parameter*>& out) override {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }
  void buffers(std::vector<Matrix*>& out) override {
    out.push_back(&running_mean_);
    out.push_back(&running_var_);
  }

 private:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.9;
  Parameter gamma_, beta_;
  Matrix running_mean_, running_var_;
  Matrix xhat_;
  std::vector<double> inv_std_;
};

Tensor add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  out.data += b.data;
  return out;
}

// Pre-activation wide residual block:
//   out = conv2(relu(bn2(conv1(relu(bn1(x)))))) + shortcut
// where the shortcut is x itself, or a strided 1x1 convolution of
// relu(bn1(x)) when the shape changes.
class ResidualBlock final : public Layer {
 public:
  ResidualBlock(int in_c, int out_c, int stride, std::mt19937_64& rng, const std::string& name)
      : bn1_(in_c, name + ".bn1"), conv1_(in_c, out_c, 3, stride, 1, false, rng, name + ".conv1"),
        bn2_(out_c, name + ".bn2"), conv2_(out_c, out_c, 3, 1, 1, false, rng, name + ".conv2") {
    if (in_c != out_c || stride != 1) {
      shortcut_ = std::make_unique<Conv2d>(in_c, out_c, 1, stride, 0, false, rng, name + ".shortcut");
    }
  }

  Tensor forward(const Tensor& x) const override {
    const Tensor a = relu_.forward(bn1_.forward(x));
    const Tensor branch = conv2_.forward(relu_.forward(bn2_.forward(conv1_.forward(a))));
    return add(branch, shortcut_ ? shortcut_->forward(a) : x);
  }

  Tensor forward_train(const Tensor& x) override {
    const Tensor a = relu1_.forward_train(bn1_.forward_train(x));
    const Tensor branch =
        conv2_.forward_train(relu2_.forward_train(bn2_.forward_train(conv1_.forward_train(a))));
    return add(branch, shortcut_ ? shortcut_->forward_train(a) : x);
  }

  Tensor backward(const Tensor& dy) override {
    Tensor da = conv1_.backward(bn2_.backward(relu2_.backward(conv2_.backward(dy))));
    if (shortcut_) {
      da.data += shortcut_->backward(dy).data;
      return bn1_.backward(relu1_.backward(da));
    }
    Tensor dx = bn1_.backward(relu1_.backward(da));
    dx.data += dy.data;
    return dx;
  }

  void parameters(std::vector<Parameter*>& out) override {
    bn1_.parameters(out);
    conv1_.parameters(out);
    bn2_.parameters(out);
    conv2_.parameters(out);
    if (shortcut_) shortcut_->parameters(out);
  }
  void buffers(std::vector<Matrix*>& out) override {
    bn1_.buffers(out);
    bn2_.buffers(out);
  }

 private:
  BatchNorm bn1_;
  Conv2d conv1_;
  BatchNorm bn2_;
  Conv2d conv2_;
  std::unique_ptr<Conv2d> shortcut_;
  Relu relu_, relu1_, relu2_;
};

}  // namespace

Tensor pack(std::span<const Image* const> images) {
  Tensor t;
  if (images.empty()) return t;
  const Dims d = images.front()->dims();
  t.batch = static_cast<int>(images.size());
  t.height = d.height;
  t.width = d.width;
  const int hw = t.spatial();
  t.data.resize(d.channels, static_cast<Eigen::Index>(t.batch) * hw);
  for (int n = 0; n < t.batch; ++n) {
    if (images[n]->dims() != d) {
      throw DimensionError("cannot batch images of dims " + to_string(images[n]->dims()) + " and " +
                           to_string(d));
    }
    for (int c = 0; c < d.channels; ++c) {
      const auto plane = images[n]->plane(c);
      std::copy(plane.begin(), plane.end(), t.data.row(c).data() + static_cast<std::size_t>(n) * hw);
    }
  }
  return t;
}

Tensor pack(std::span<const Image> images) {
  std::vector<const Image*> ptrs;
  ptrs.reserve(images.size());
  for (const auto& im : images) ptrs.push_back(&im);
  return pack(std::span<const Image* const>(ptrs));
}

std::string Architecture::describe() const {
  if (kind == Kind::SmallConv) return "small_conv(" + std::to_string(width_factor) + ")";
  return "wide_residual(" + std::to_string(depth) + "," + std::to_string(width_factor) + ")";
}

Architecture Architecture::parse(const std::string& text) {
  static const std::regex small(R"(\s*small_conv\s*(?:\(\s*(\d+)\s*\))?\s*)");
  static const std::regex wide(R"(\s*wide_residual\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*)");
  std::smatch m;
  Architecture a;
  if (std::regex_match(text, m, small)) {
    a = small_conv(m[1].matched ? std::stoi(m[1]) : 4);
  } else if (std::regex_match(text, m, wide)) {
    a = wide_residual(std::stoi(m[1]), std::stoi(m[2]));
  } else {
    throw InvalidArgument("unknown architecture '" + text +
                          "'; expected small_conv, small_conv(k) or wide_residual(depth,k)");
  }
  a.validate();
  return a;
}

void Architecture::validate() const {
  if (width_factor < 1) throw InvalidArgument("width_factor must be positive");
  if (kind == Kind::WideResidual && (depth < 10 || (depth - 4) % 6 != 0)) {
    throw InvalidArgument("wide_residual depth must be 6k+4 with k >= 1, got " + std::to_string(depth));
  }
}

Network::Network(const Architecture& arch, Dims input, int n_classes, std::uint64_t seed)
    : arch_(arch), input_(input), n_classes_(n_classes) {
  arch.validate();
  if (n_classes < 2) throw InvalidArgument("a classifier needs at least 2 classes");
  if (input.height < 1 || input.width < 1 || input.channels < 1) {
    throw InvalidArgument("invalid input dims " + to_string(input));
  }
  std::mt19937_64 rng(seed);
  if (arch.kind == Architecture::Kind::SmallConv) {
    // Three conv blocks (conv3x3 + ReLU, 2x2 average pooling between blocks),
    // global average pooling and a linear head.
    const int base = 4 * arch.width_factor;
    int c = input.channels, h = input.height, w = input.width;
    for (int block = 0; block < 3; ++block) {
      const int out_c = base << block;
      layers_.push_back(std::make_unique<Conv2d>(c, out_c, 3, 1, 1, true, rng, "conv" + std::to_string(block + 1)));
      layers_.push_back(std::make_unique<Relu>());
      if (block < 2 && h >= 2 && w >= 2) {
        layers_.push_back(std::make_unique<AvgPool2>());
        h /= 2;
        w /= 2;
      }
      c = out_c;
    }
    layers_.push_back(std::make_unique<GlobalAvgPool>());
    layers_.push_back(std::make_unique<Dense>(c, n_classes, rng, "head"));
  } else {
    const int per_group = (arch.depth - 4) / 6;
    const int k = arch.width_factor;
    const int widths[3] = {16 * k, 32 * k, 64 * k};
    layers_.push_back(std::make_unique<Conv2d>(input.channels, 16, 3, 1, 1, false, rng, "stem"));
    int c = 16;
    for (int g = 0; g < 3; ++g) {
      for (int b = 0; b < per_group; ++b) {
        const int stride = (g > 0 && b == 0) ? 2 : 1;
        layers_.push_back(std::make_unique<ResidualBlock>(
            c, widths[g], stride, rng, "group" + std::to_string(g + 1) + ".block" + std::to_string(b + 1)));
        c = widths[g];
      }
    }
    layers_.push_back(std::make_unique<BatchNorm>(c, "final_bn"));
    layers_.push_back(std::make_unique<Relu>());
    layers_.push_back(std::make_unique<GlobalAvgPool>());
    layers_.push_back(std::make_unique<Dense>(c, n_classes, rng, "head"));
  }
}

Matrix Network::logits(const Tensor& x) const {
  if (x.channels() != input_.channels || x.height != input_.height || x.width != input_.width) {
    throw DimensionError("network expects " + to_string(input_) + " inputs, got " +
                         to_string(Dims{x.height, x.width, x.channels()}));
  }
  Tensor t = x;
  for (const auto& layer : layers_) t = layer->forward(t);
  return t.data;
}

Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index n = 0; n < logits.cols(); ++n) {
    const double mx = logits.col(n).maxCoeff();
    p.col(n) = (logits.col(n).array() - mx).exp();
    p.col(n) /= p.col(n).sum();
  }
  return p;
}

Matrix Network::predict_proba(const Tensor& x) const { return softmax(logits(x)); }

namespace {

double cross_entropy(const Matrix& probs, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    total -= std::log(std::max(probs(labels[n], static_cast<Eigen::Index>(n)), 1e-300));
  }
  return total / static_cast<double>(labels.size());
}

void check_labels(std::span<const int> labels, int batch, int n_classes) {
  if (static_cast<int>(labels.size()) != batch) {
    throw DimensionError("label count " + std::to_string(labels.size()) + " != batch size " +
                         std::to_string(batch));
  }
  for (int l : labels) {
    if (l < 0 || l >= n_classes) throw InvalidArgument("label " + std::to_string(l) + " out of range");
  }
}

}  // namespace

double Network::loss(const Tensor& x, std::span<const int> labels) const {
  check_labels(labels, x.batch, n_classes_);
  return cross_entropy(predict_proba(x), labels);
}

double Network::loss_and_gradient(const Tensor& x, std::span<const int> labels) {
  check_labels(labels, x.batch, n_classes_);
  if (x.channels() != input_.channels || x.height != input_.height || x.width != input_.width) {
    throw DimensionError("network expects " + to_string(input_) + " inputs");
  }
  for (Parameter* p : parameters()) p->grad.setZero();
  Tensor t = x;
  for (auto& layer : layers_) t = layer->forward_train(t);
  const Matrix probs = softmax(t.data);
  const double loss = cross_entropy(probs, labels);
  Tensor grad = t;
  grad.data = probs;
  for (std::size_t n = 0; n < labels.size(); ++n) grad.data(labels[n], static_cast<Eigen::Index>(n)) -= 1.0;
  grad.data /= static_cast<double>(labels.size());
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) grad = (*it)->backward(grad);
  return loss;
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) layer->parameters(out);
  return out;
}

std::size_t Network::parameter_count() {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->value.size();
  return n;
}

std::vector<double> Network::state() const {
  auto& self = const_cast<Network&>(*this);
  std::vector<double> out;
  for (const Parameter* p : self.parameters()) out.insert(out.end(), p->value.data(), p->value.data() + p->value.size());
  std::vector<Matrix*> bufs;
  for (auto& layer : self.layers_) layer->buffers(bufs);
  for (const Matrix* b : bufs) out.insert(out.end(), b->data(), b->data() + b->size());
  return out;
}

std::size_t Network::state_size() const {
  auto& self = const_cast<Network&>(*this);
  std::size_t n = self.parameter_count();
  std::vector<Matrix*> bufs;
  for (auto& layer : self.layers_) layer->buffers(bufs);
  for (const Matrix* b : bufs) n += b->size();
  return n;
}

void Network::load_state(std::span<const double> values) {
  if (values.size() != state_size()) {
    throw DimensionError("state has " + std::to_string(values.size()) + " values, network needs " +
                         std::to_string(state_size()));
  }
  std::size_t off = 0;
  for (Parameter* p : parameters()) {
    std::copy_n(values.data() + off, p->value.size(), p->value.data());
    off += p->value.size();
  }
  std::vector<Matrix*> bufs;
  for (auto& layer : layers_) layer->buffers(bufs);
  for (Matrix* b : bufs) {
    std::copy_n(values.data() + off, b->size(), b->data());
    off += b->size();
  }
}

Adam::Adam(double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
}

void Adam::step(std::span<Parameter* const> params) {
  if (m_.empty()) {
    for (const Parameter* p : params) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  ++t_;
  const double lr_t = lr_ * std::sqrt(1.0 - std::pow(beta2_, t_)) / (1.0 - std::pow(beta1_, t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr_t * m_[i].array() / (v_[i].array().sqrt() + eps_);
  }
}

}  // namespace occ::nn

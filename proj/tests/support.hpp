#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "occkit/classifier.hpp"
#include "occkit/evaluation.hpp"
#include "occkit/image.hpp"

namespace occ::oracle {

// Stub that "recognizes" every transform: the k-th image of a call is the
// k-th transformed counterpart, so it gets the one-hot vector e_(k mod n).
class IdentityOracle : public ProbabilityModel {
 public:
  IdentityOracle(int n, Dims dims) : n_(n), dims_(dims) {}
  int n_classes() const override { return n_; }
  Dims input_dims() const override { return dims_; }
  std::vector<std::vector<double>> predict_proba(std::span<const Image* const> images) const override {
    std::vector<std::vector<double>> out;
    for (std::size_t k = 0; k < images.size(); ++k) {
      std::vector<double> p(n_, 0.0);
      p[k % n_] = 1.0;
      out.push_back(std::move(p));
    }
    return out;
  }
  std::string model_id() const override { return "identity-oracle"; }

 private:
  int n_;
  Dims dims_;
};

class UniformStub : public ProbabilityModel {
 public:
  UniformStub(int n, Dims dims) : n_(n), dims_(dims) {}
  int n_classes() const override { return n_; }
  Dims input_dims() const override { return dims_; }
  std::vector<std::vector<double>> predict_proba(std::span<const Image* const> images) const override {
    return std::vector<std::vector<double>>(images.size(), std::vector<double>(n_, 1.0 / n_));
  }
  std::string model_id() const override { return "uniform"; }

 private:
  int n_;
  Dims dims_;
};

// Probability that a random majority sample outranks a random minority one,
// ties counted as one half, by enumerating every pair.
inline double brute_force_auc(const LabeledScores& ls) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < ls.scores.size(); ++i) {
    if (!ls.is_majority[i]) continue;
    for (std::size_t j = 0; j < ls.scores.size(); ++j) {
      if (ls.is_majority[j]) continue;
      ++pairs;
      if (ls.scores[i] > ls.scores[j]) wins += 1.0;
      else if (ls.scores[i] == ls.scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Average precision by sweeping every distinct threshold: at each threshold t
// the prediction set is {score >= t}; AP = sum over thresholds of
// (recall gain) * precision.
inline double threshold_sweep_ap(const std::vector<double>& scores, const std::vector<bool>& positive) {
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const double total_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0, predicted = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        ++predicted;
        if (positive[i]) ++tp;
      }
    }
    const double recall = tp / total_pos;
    ap += (recall - prev_recall) * (tp / predicted);
    prev_recall = recall;
  }
  return ap;
}

inline Image random_image(Dims dims, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Image img(dims);
  for (double& v : img.pixels()) v = u(rng);
  return img;
}

}  // namespace occ::oracle

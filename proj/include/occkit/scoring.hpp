#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "occkit/classifier.hpp"
#include "occkit/dataio.hpp"
#include "occkit/transforms.hpp"

namespace occ {

// n x n matrix whose row i is the class distribution predicted for the i-th
// transformed counterpart of one sample.
class ProbabilityMatrix {
 public:
  // Validates that every row is a distribution (entries >= 0, sum 1 +- 1e-6).
  ProbabilityMatrix(int n, std::vector<double> row_major);

  int size() const { return n_; }
  double operator()(int i, int j) const { return values_[static_cast<std::size_t>(i) * n_ + j]; }
  std::vector<double> diagonal() const;
  const std::vector<double>& values() const { return values_; }

 private:
  int n_;
  std::vector<double> values_;
};

ProbabilityMatrix probability_matrix(const ProbabilityModel& model, const Image& image, const TransformSet& set);

// Sum of the diagonal; higher means more majority-like. Lies in [0, n].
double score(const ProbabilityMatrix& p);

struct ScoreReport {
  std::string sample_id;
  double score = 0.0;
  std::vector<double> diagonal;
  std::optional<int> is_majority;  // ground truth when known
  std::string transform_set;
  std::string model_id;
};

struct ScoreFailure {
  std::string sample_id;
  std::string error;
};

struct ScoreBatchResult {
  std::vector<ScoreReport> reports;  // input order, failed samples omitted
  std::vector<ScoreFailure> failures;
};

// Scores every sample; per-sample failures are collected and the batch
// continues. `batch.labels` are taken as majority flags when
// `labels_are_ground_truth` is set.
ScoreBatchResult score_batch(const ProbabilityModel& model, const SampleBatch& batch, const TransformSet& set,
                             bool labels_are_ground_truth = true);

// "sample_id,score,is_majority,d1..dn" with a header row.
std::string scores_csv(const std::vector<ScoreReport>& reports);

}  // namespace occ

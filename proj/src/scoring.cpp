#include "occkit/scoring.hpp"

#include <cmath>
#include <sstream>

#include "occkit/error.hpp"
#include "occkit/io_util.hpp"

namespace occ {

ProbabilityMatrix::ProbabilityMatrix(int n, std::vector<double> row_major) : n_(n), values_(std::move(row_major)) {
  if (n < 1 || values_.size() != static_cast<std::size_t>(n) * n) {
    throw DimensionError("probability matrix needs n*n = " + std::to_string(n * n) + " values");
  }
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double v = (*this)(i, j);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidArgument("probability matrix row " + std::to_string(i + 1) + " has an invalid entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw InvalidArgument("probability matrix row " + std::to_string(i + 1) + " sums to " + format_double(sum));
    }
  }
}

std::vector<double> ProbabilityMatrix::diagonal() const {
  std::vector<double> d(n_);
  for (int i = 0; i < n_; ++i) d[i] = (*this)(i, i);
  return d;
}

ProbabilityMatrix probability_matrix(const ProbabilityModel& model, const Image& image, const TransformSet& set) {
  if (model.n_classes() != set.size()) {
    throw DimensionError("model predicts " + std::to_string(model.n_classes()) + " classes but transform set '" +
                         set.name() + "' has " + std::to_string(set.size()));
  }
  if (image.dims() != model.input_dims()) {
    throw DimensionError("image dims " + to_string(image.dims()) + " != model input dims " +
                         to_string(model.input_dims()));
  }
  std::vector<Image> counterparts;
  counterparts.reserve(set.size());
  for (auto& [im, label] : expand(image, set)) counterparts.push_back(std::move(im));
  const auto rows = model.predict_proba(std::span<const Image>(counterparts));
  const int n = set.size();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n) * n);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != n) throw DimensionError("model returned a vector of the wrong length");
    values.insert(values.end(), row.begin(), row.end());
  }
  return ProbabilityMatrix(n, std::move(values));
}

double score(const ProbabilityMatrix& p) {
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) s += p(i, i);
  return s;
}

ScoreBatchResult score_batch(const ProbabilityModel& model, const SampleBatch& batch, const TransformSet& set,
                             bool labels_are_ground_truth) {
  if (model.n_classes() != set.size()) {
    throw DimensionError("model predicts " + std::to_string(model.n_classes()) + " classes but transform set '" +
                         set.name() + "' has " + std::to_string(set.size()));
  }
  ScoreBatchResult result;
  const std::string id = model.model_id();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    try {
      const auto p = probability_matrix(model, batch.images[i], set);
      ScoreReport r;
      r.sample_id = batch.ids[i];
      r.diagonal = p.diagonal();
      for (double d : r.diagonal) r.score += d;
      if (labels_are_ground_truth) r.is_majority = batch.labels[i];
      r.transform_set = set.name();
      r.model_id = id;
      result.reports.push_back(std::move(r));
    } catch (const Error& e) {
      result.failures.push_back({batch.ids[i], e.what()});
    }
  }
  return result;
}

std::string scores_csv(const std::vector<ScoreReport>& reports) {
  std::ostringstream out;
  out << "sample_id,score,is_majority";
  const std::size_t n = reports.empty() ? 0 : reports.front().diagonal.size();
  for (std::size_t i = 1; i <= n; ++i) out << ",d" << i;
  out << "\n";
  for (const auto& r : reports) {
    out << r.sample_id << "," << format_double(r.score) << ",";
    if (r.is_majority) out << *r.is_majority;
    for (double d : r.diagonal) out << "," << format_double(d);
    out << "\n";
  }
  return out.str();
}

}  // namespace occ

#pragma once

#include <span>
#include <string>
#include <vector>

#include "occkit/scoring.hpp"

namespace occ {

// Scores with majority (true) / minority (false) ground truth. Higher scores
// are more majority-like.
struct LabeledScores {
  std::vector<double> scores;
  std::vector<bool> is_majority;

  // Throws unless both lists share one length, all scores are finite and
  // both classes are present.
  void validate() const;
  static LabeledScores from_reports(std::span<const ScoreReport> reports);
};

enum class Positive { Majority, Minority };

// Mann-Whitney statistic with majority as the positive class: probability a
// random majority sample outscores a random minority one, ties counted half.
double auc(const LabeledScores& ls);

// Step-wise average precision, sum_k (R_k - R_{k-1}) P_k over descending
// thresholds. Tied scores form a single threshold. Minority-as-positive
// ranks by -score.
double aupr(const LabeledScores& ls, Positive positive);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct PrPoint {
  double threshold;
  double recall;
  double precision;
};

// Majority-positive ROC, starting at (0,0) with threshold +inf.
std::vector<RocPoint> roc_curve(const LabeledScores& ls);
std::vector<PrPoint> pr_curve(const LabeledScores& ls, Positive positive);

std::string roc_csv(const std::vector<RocPoint>& points);
std::string pr_csv(const std::vector<PrPoint>& points);

struct RunMetrics {
  double auc = 0.0;
  double aupr_maj = 0.0;
  double aupr_min = 0.0;
};

RunMetrics evaluate(const LabeledScores& ls);

struct MetricSummary {
  std::vector<double> per_run;
  double mean = 0.0;
  double std = 0.0;  // population flavour (divides by the run count)
};

MetricSummary summarize(std::span<const double> values);

struct EvalReport {
  MetricSummary auc;
  MetricSummary aupr_maj;
  MetricSummary aupr_min;
  int runs = 0;
};

// Requires at least one run.
EvalReport aggregate_runs(std::span<const RunMetrics> runs);

// "78.4±0.9": mean and std in percent, one decimal.
std::string format_percent(const MetricSummary& m);

// JSON metric report with per-run values and aggregates (fractions and
// percent).
std::string eval_report_json(const EvalReport& report);

}  // namespace occ

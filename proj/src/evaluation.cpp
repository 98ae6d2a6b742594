#include "occkit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "occkit/error.hpp"
#include "occkit/io_util.hpp"

namespace occ {
namespace {

struct Ranked {
  double score;
  bool positive;
};

// Sorted by descending score.
std::vector<Ranked> rank(const LabeledScores& ls, Positive positive) {
  ls.validate();
  std::vector<Ranked> r(ls.scores.size());
  const bool maj = positive == Positive::Majority;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = {maj ? ls.scores[i] : -ls.scores[i], ls.is_majority[i] == maj};
  }
  std::stable_sort(r.begin(), r.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });
  return r;
}

// Calls fn(threshold, tp, fp) after each group of tied scores.
template <class Fn>
void sweep(const std::vector<Ranked>& r, Fn fn) {
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < r.size();) {
    const double thr = r[i].score;
    for (; i < r.size() && r[i].score == thr; ++i) (r[i].positive ? tp : fp) += 1;
    fn(thr, tp, fp);
  }
}

}  // namespace

void LabeledScores::validate() const {
  if (scores.size() != is_majority.size()) {
    throw DimensionError("scores and labels differ in length");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidArgument("non-finite score");
  }
  const auto n_maj = std::count(is_majority.begin(), is_majority.end(), true);
  if (n_maj == 0 || n_maj == static_cast<long>(is_majority.size())) {
    throw InvalidArgument("metrics need at least one majority and one minority sample");
  }
}

LabeledScores LabeledScores::from_reports(std::span<const ScoreReport> reports) {
  LabeledScores ls;
  for (const auto& r : reports) {
    if (!r.is_majority) throw InvalidArgument("score report '" + r.sample_id + "' has no ground truth");
    ls.scores.push_back(r.score);
    ls.is_majority.push_back(*r.is_majority != 0);
  }
  return ls;
}

double auc(const LabeledScores& ls) {
  ls.validate();
  std::vector<std::pair<double, bool>> v(ls.scores.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = {ls.scores[i], ls.is_majority[i]};
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double wins = 0.0, neg_below = 0.0, pos_total = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    const double s = v[i].first;
    double pos = 0.0, neg = 0.0;
    for (; i < v.size() && v[i].first == s; ++i) (v[i].second ? pos : neg) += 1.0;
    wins += pos * neg_below + 0.5 * pos * neg;
    neg_below += neg;
    pos_total += pos;
  }
  return wins / (pos_total * neg_below);
}

double aupr(const LabeledScores& ls, Positive positive) {
  const auto r = rank(ls, positive);
  const double total_pos =
      static_cast<double>(std::count_if(r.begin(), r.end(), [](const Ranked& x) { return x.positive; }));
  double ap = 0.0, prev_recall = 0.0;
  sweep(r, [&](double, std::size_t tp, std::size_t fp) {
    const double recall = tp / total_pos;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  });
  return ap;
}

std::vector<RocPoint> roc_curve(const LabeledScores& ls) {
  const auto r = rank(ls, Positive::Majority);
  const double total_pos =
      static_cast<double>(std::count_if(r.begin(), r.end(), [](const Ranked& x) { return x.positive; }));
  const double total_neg = static_cast<double>(r.size()) - total_pos;
  std::vector<RocPoint> pts{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  sweep(r, [&](double thr, std::size_t tp, std::size_t fp) { pts.push_back({thr, fp / total_neg, tp / total_pos}); });
  return pts;
}

std::vector<PrPoint> pr_curve(const LabeledScores& ls, Positive positive) {
  const auto r = rank(ls, positive);
  const double total_pos =
      static_cast<double>(std::count_if(r.begin(), r.end(), [](const Ranked& x) { return x.positive; }));
  const double sign = positive == Positive::Majority ? 1.0 : -1.0;
  std::vector<PrPoint> pts;
  sweep(r, [&](double thr, std::size_t tp, std::size_t fp) {
    pts.push_back({sign * thr, tp / total_pos, static_cast<double>(tp) / static_cast<double>(tp + fp)});
  });
  return pts;
}

std::string roc_csv(const std::vector<RocPoint>& points) {
  std::ostringstream out;
  out << "threshold,fpr,tpr\n";
  for (const auto& p : points) {
    out << (std::isinf(p.threshold) ? std::string("inf") : format_double(p.threshold)) << ","
        << format_double(p.fpr) << "," << format_double(p.tpr) << "\n";
  }
  return out.str();
}

std::string pr_csv(const std::vector<PrPoint>& points) {
  std::ostringstream out;
  out << "threshold,recall,precision\n";
  for (const auto& p : points) {
    out << format_double(p.threshold) << "," << format_double(p.recall) << "," << format_double(p.precision) << "\n";
  }
  return out.str();
}

RunMetrics evaluate(const LabeledScores& ls) {
  return RunMetrics{auc(ls), aupr(ls, Positive::Majority), aupr(ls, Positive::Minority)};
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary m;
  m.per_run.assign(values.begin(), values.end());
  if (values.empty()) return m;
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(values.size()));
  return m;
}

EvalReport aggregate_runs(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw InvalidArgument("aggregate_runs needs at least one run");
  std::vector<double> a, pm, pn;
  for (const auto& r : runs) {
    a.push_back(r.auc);
    pm.push_back(r.aupr_maj);
    pn.push_back(r.aupr_min);
  }
  EvalReport report;
  report.auc = summarize(a);
  report.aupr_maj = summarize(pm);
  report.aupr_min = summarize(pn);
  report.runs = static_cast<int>(runs.size());
  return report;
}

std::string format_percent(const MetricSummary& m) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f±%.1f", 100.0 * m.mean, 100.0 * m.std);
  return buf;
}

std::string eval_report_json(const EvalReport& report) {
  auto metric = [](const MetricSummary& m) {
    std::vector<double> pct;
    for (double v : m.per_run) pct.push_back(100.0 * v);
    return nlohmann::json{{"mean", m.mean},
                          {"std", m.std},
                          {"per_run", m.per_run},
                          {"mean_percent", 100.0 * m.mean},
                          {"std_percent", 100.0 * m.std},
                          {"per_run_percent", pct},
                          {"formatted", format_percent(m)}};
  };
  nlohmann::json doc{{"runs", report.runs},
                     {"std_flavor", "population"},
                     {"auc", metric(report.auc)},
                     {"aupr_maj", metric(report.aupr_maj)},
                     {"aupr_min", metric(report.aupr_min)}};
  return doc.dump(2) + "\n";
}

}  // namespace occ

#include <gtest/gtest.h>

#include <random>

#include "occkit/error.hpp"
#include "occkit/evaluation.hpp"
#include "support.hpp"

using namespace occ;

namespace {

LabeledScores make(std::vector<double> maj, std::vector<double> min) {
  LabeledScores ls;
  for (double s : maj) {
    ls.scores.push_back(s);
    ls.is_majority.push_back(true);
  }
  for (double s : min) {
    ls.scores.push_back(s);
    ls.is_majority.push_back(false);
  }
  return ls;
}

// Random instance of 2..12 scores on a coarse grid so ties are common.
LabeledScores random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(2, 12), level(0, 4), coin(0, 1);
  LabeledScores ls;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    ls.scores.push_back(level(rng) / 4.0);
    ls.is_majority.push_back(coin(rng) == 1);
  }
  ls.is_majority[0] = true;
  ls.is_majority[1] = false;
  return ls;
}

}  // namespace

TEST(Auc, WorkedExamples) {
  EXPECT_EQ(auc(make({0.9, 0.8}, {0.1, 0.2})), 1.0);
  EXPECT_EQ(auc(make({0.5, 0.5}, {0.5, 0.5, 0.5})), 0.5);
  EXPECT_EQ(auc(make({0.8, 0.4}, {0.6, 0.2})), 0.75);
}

TEST(Auc, MatchesPairwiseBruteForceExactly) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ls = random_instance(rng);
    ASSERT_EQ(auc(ls), oracle::brute_force_auc(ls)) << "trial " << trial;
  }
}

TEST(Auc, AntiSymmetricUnderLabelSwap) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto ls = random_instance(rng);
    const double a = auc(ls);
    for (std::size_t i = 0; i < ls.is_majority.size(); ++i) ls.is_majority[i] = !ls.is_majority[i];
    EXPECT_NEAR(a + auc(ls), 1.0, 1e-12);
  }
}

TEST(Metrics, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto ls = random_instance(rng);
    const auto before = evaluate(ls);
    for (double& s : ls.scores) s = std::exp(3.0 * s) - 7.0;
    const auto after = evaluate(ls);
    EXPECT_EQ(before.auc, after.auc);
    EXPECT_EQ(before.aupr_maj, after.aupr_maj);
    EXPECT_EQ(before.aupr_min, after.aupr_min);
  }
}

TEST(Aupr, HandEnumeratedFixtures) {
  // {0.9(+), 0.8(-), 0.7(+)}: thresholds 0.9 -> (R 1/2, P 1), 0.8 -> (1/2, 1/2), 0.7 -> (1, 2/3)
  const auto a = make({0.9, 0.7}, {0.8});
  EXPECT_NEAR(aupr(a, Positive::Majority), 0.5 * 1.0 + 0.5 * (2.0 / 3.0), 1e-12);
  // minority as positive ranks low scores first: 0.7(-) then 0.8(+): R 1 at P 1/2
  EXPECT_NEAR(aupr(a, Positive::Minority), 0.5, 1e-12);

  // perfect separation
  const auto b = make({0.9, 0.8}, {0.1, 0.2});
  EXPECT_EQ(aupr(b, Positive::Majority), 1.0);
  EXPECT_EQ(aupr(b, Positive::Minority), 1.0);

  // tie group {0.5(+), 0.5(-)} enters at once: 0.9 -> (1/2, 1), 0.5 -> (1, 2/3)
  const auto c = make({0.9, 0.5}, {0.5, 0.1});
  EXPECT_NEAR(aupr(c, Positive::Majority), 0.5 + 0.5 * (2.0 / 3.0), 1e-12);
  // minority: 0.1 -> (1/2, 1), 0.5 -> (1, 2/3)
  EXPECT_NEAR(aupr(c, Positive::Minority), 0.5 + 0.5 * (2.0 / 3.0), 1e-12);
}

TEST(Aupr, MatchesThresholdSweepOracle) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ls = random_instance(rng);
    EXPECT_NEAR(aupr(ls, Positive::Majority), oracle::threshold_sweep_ap(ls.scores, ls.is_majority), 1e-12);
    std::vector<double> neg;
    std::vector<bool> flipped;
    for (std::size_t i = 0; i < ls.scores.size(); ++i) {
      neg.push_back(-ls.scores[i]);
      flipped.push_back(!ls.is_majority[i]);
    }
    EXPECT_NEAR(aupr(ls, Positive::Minority), oracle::threshold_sweep_ap(neg, flipped), 1e-12);
  }
}

TEST(Aupr, RandomScoresApproachPositiveFraction) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LabeledScores ls;
  const double pi = 0.3;
  for (int i = 0; i < 10000; ++i) {
    ls.scores.push_back(u(rng));
    ls.is_majority.push_back(u(rng) < pi);
  }
  EXPECT_NEAR(aupr(ls, Positive::Majority), pi, 0.05);
  EXPECT_NEAR(aupr(ls, Positive::Minority), 1 - pi, 0.05);
}

TEST(Curves, RocAndPrShapes) {
  const auto ls = make({0.9, 0.5}, {0.5, 0.1});
  const auto roc = roc_curve(ls);
  ASSERT_EQ(roc.size(), 4u);
  EXPECT_TRUE(std::isinf(roc.front().threshold));
  EXPECT_EQ(roc[1].tpr, 0.5);
  EXPECT_EQ(roc[2].fpr, 0.5);
  EXPECT_EQ(roc.back().fpr, 1.0);
  EXPECT_EQ(roc.back().tpr, 1.0);
  const auto pr = pr_curve(ls, Positive::Majority);
  ASSERT_EQ(pr.size(), 3u);
  EXPECT_EQ(pr[0].precision, 1.0);
  EXPECT_EQ(roc_csv(roc).substr(0, 14), "threshold,fpr,");
}

TEST(LabeledScores, Validation) {
  EXPECT_THROW(auc(make({0.1, 0.2}, {})), InvalidArgument);
  EXPECT_THROW(auc(make({}, {0.1})), InvalidArgument);
  EXPECT_THROW(auc(make({std::nan("")}, {0.1})), InvalidArgument);
  LabeledScores bad{{0.1, 0.2}, {true}};
  EXPECT_THROW(bad.validate(), DimensionError);
}

TEST(Aggregate, PopulationStd) {
  const std::vector<double> runs{70, 74, 78};
  const auto s = summarize(runs);
  EXPECT_NEAR(s.mean, 74.0, 1e-12);
  EXPECT_NEAR(s.std, std::sqrt(32.0 / 3.0), 1e-12);
  EXPECT_NEAR(s.std, 3.266, 5e-4);

  const std::vector<double> one{0.8};
  EXPECT_EQ(summarize(one).std, 0.0);
  const std::vector<double> same{0.6, 0.6, 0.6};
  EXPECT_EQ(summarize(same).std, 0.0);
  EXPECT_EQ(summarize(same).mean, 0.6);
}

TEST(Aggregate, RunsToPercentReport) {
  const std::vector<RunMetrics> runs{{0.70, 0.5, 0.4}, {0.74, 0.6, 0.5}, {0.78, 0.7, 0.6}};
  const auto r = aggregate_runs(runs);
  EXPECT_EQ(r.runs, 3);
  EXPECT_NEAR(r.auc.mean, 0.74, 1e-9);
  double sum = 0;
  for (double v : r.auc.per_run) sum += v;
  EXPECT_NEAR(sum / 3, r.auc.mean, 1e-9);
  EXPECT_EQ(format_percent(r.auc), "74.0±3.3");
  EXPECT_THROW(aggregate_runs(std::span<const RunMetrics>{}), InvalidArgument);
  EXPECT_NE(eval_report_json(r).find("\"population\""), std::string::npos);
}

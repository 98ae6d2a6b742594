#include <gtest/gtest.h>

#include <random>

#include "occkit/dataio.hpp"
#include "occkit/error.hpp"
#include "occkit/scoring.hpp"
#include "support.hpp"

using namespace occ;

namespace {

SampleBatch random_batch(int k, Dims d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SampleBatch b;
  for (int i = 0; i < k; ++i) b.push_back(oracle::random_image(d, rng), i % 2, "s" + std::to_string(i));
  return b;
}

}  // namespace

TEST(ProbabilityMatrix, ValidatesRows) {
  EXPECT_NO_THROW(ProbabilityMatrix(2, {0.7, 0.3, 0.4, 0.6}));
  EXPECT_THROW(ProbabilityMatrix(2, {0.7, 0.4, 0.4, 0.6}), InvalidArgument);
  EXPECT_THROW(ProbabilityMatrix(2, {1.1, -0.1, 0.4, 0.6}), InvalidArgument);
  EXPECT_THROW(ProbabilityMatrix(2, {1.0, 0.0, 1.0}), DimensionError);
}

TEST(Score, DirectSummation) {
  EXPECT_NEAR(score(ProbabilityMatrix(2, {0.7, 0.3, 0.4, 0.6})), 1.3, 1e-12);
  std::vector<double> eye(25, 0.0), uniform(25, 0.2);
  for (int i = 0; i < 5; ++i) eye[i * 6] = 1.0;
  EXPECT_EQ(score(ProbabilityMatrix(5, eye)), 5.0);
  EXPECT_NEAR(score(ProbabilityMatrix(5, uniform)), 1.0, 1e-9);
}

TEST(Score, IdentityOracleGivesUnitMatrix) {
  const Dims d{6, 6, 1};
  std::mt19937_64 rng(1);
  for (const auto& name : {"LM(5,0)", "LM(3,0)", "R(4,0)"}) {
    const auto set = preset(name, 6);
    oracle::IdentityOracle oracle(set.size(), d);
    const auto p = probability_matrix(oracle, oracle::random_image(d, rng), set);
    for (int i = 0; i < set.size(); ++i) {
      for (int j = 0; j < set.size(); ++j) EXPECT_EQ(p(i, j), i == j ? 1.0 : 0.0);
    }
    EXPECT_EQ(score(p), static_cast<double>(set.size()));
  }
}

TEST(Score, UniformStubScoresOne) {
  const Dims d{6, 6, 1};
  const auto set = preset("LM(5,1)");
  oracle::UniformStub stub(5, d);
  std::mt19937_64 rng(2);
  const auto p = probability_matrix(stub, oracle::random_image(d, rng), set);
  for (double v : p.values()) EXPECT_NEAR(v, 0.2, 1e-12);
  EXPECT_NEAR(score(p), 1.0, 1e-9);
}

TEST(Score, DiagonalSumProperty) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> size(2, 9);
  std::gamma_distribution<double> g(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(rng);
    std::vector<double> v(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      double sum = 0;
      for (int j = 0; j < n; ++j) sum += v[i * n + j] = g(rng) + 1e-12;
      for (int j = 0; j < n; ++j) v[i * n + j] /= sum;
    }
    const ProbabilityMatrix p(n, v);
    const auto diag = p.diagonal();
    double expected = 0;
    for (double d : diag) expected += d;
    const double s = score(p);
    EXPECT_NEAR(s, expected, 1e-9);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, static_cast<double>(n));
  }
}

TEST(ScoreBatch, OrderAndConcatenationInvariance) {
  const Dims d{6, 6, 1};
  const auto set = preset("LM(5,0)");
  oracle::IdentityOracle oracle(5, d);
  const auto batch = random_batch(9, d, 4);
  const auto all = score_batch(oracle, batch, set);
  ASSERT_EQ(all.reports.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(all.reports[i].sample_id, batch.ids[i]);
    EXPECT_EQ(all.reports[i].is_majority, batch.labels[i]);
    EXPECT_EQ(all.reports[i].model_id, "identity-oracle");
    EXPECT_EQ(all.reports[i].transform_set, "LM(5,0)");
  }
  const auto head = score_batch(oracle, batch.slice(0, 4), set);
  const auto tail = score_batch(oracle, batch.slice(4, 9), set);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(head.reports[i].score, all.reports[i].score);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(tail.reports[i].score, all.reports[4 + i].score);
}

TEST(ScoreBatch, EmptyBatch) {
  oracle::UniformStub stub(5, {6, 6, 1});
  const auto r = score_batch(stub, SampleBatch{}, preset("LM(5,0)"));
  EXPECT_TRUE(r.reports.empty());
  EXPECT_TRUE(r.failures.empty());
}

TEST(ScoreBatch, CollectsPerSampleFailures) {
  const Dims d{6, 6, 1};
  oracle::UniformStub stub(5, d);
  SampleBatch b = random_batch(3, d, 5);
  b.push_back(Image(Dims{7, 7, 1}, 0.5), 0, "wrong-size");
  const auto r = score_batch(stub, b, preset("LM(5,0)"));
  EXPECT_EQ(r.reports.size(), 3u);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].sample_id, "wrong-size");
}

TEST(ScoresCsv, Format) {
  ScoreReport r{"a.png", 1.25, {0.5, 0.75}, 1, "X", "m"};
  ScoreReport u{"b.png", 0.5, {0.25, 0.25}, std::nullopt, "X", "m"};
  EXPECT_EQ(scores_csv({r, u}), "sample_id,score,is_majority,d1,d2\na.png,1.25,1,0.5,0.75\nb.png,0.5,,0.25,0.25\n");
}

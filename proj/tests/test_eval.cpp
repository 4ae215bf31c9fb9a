#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ews/eval.hpp"
#include "ews/features.hpp"
#include "ews/panel_data.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ews;
using testutil::throws_code;

namespace {

struct Instance {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Scores on a coarse grid so ties are common; both classes present.
Instance random_instance(std::mt19937_64& rng, std::size_t n, int grid = 10) {
  std::uniform_int_distribution<int> g(0, grid);
  std::bernoulli_distribution coin(0.35);
  Instance in;
  for (std::size_t i = 0; i < n; ++i) {
    in.labels.push_back(coin(rng));
    in.scores.push_back(g(rng) / static_cast<double>(grid) + 0.05 * in.labels.back());
  }
  in.labels[0] = 1;
  in.labels[1] = 0;
  return in;
}

}  // namespace

TEST(RocAuc, PerfectSeparationAndAllTies) {
  const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
  const std::vector<int> y{0, 0, 1, 1};
  EXPECT_EQ(roc_auc(s, y), 1.0);
  EXPECT_EQ(pr_auc(s, y), 1.0);
  EXPECT_EQ(roc_auc(std::vector<double>(4, 0.3), y), 0.5);
}

TEST(RocAuc, MatchesPairCountingOnRandomInstances) {
  std::mt19937_64 rng(50);
  for (int t = 0; t < 200; ++t) {
    const auto in = random_instance(rng, 2 + t % 199, 3 + t % 20);
    ASSERT_EQ(roc_auc(in.scores, in.labels), oracle::pair_count_auc(in.scores, in.labels)) << t;
  }
}

TEST(RocAuc, InvariantUnderIncreasingTransformsAndComplementsUnderNegation) {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 50; ++t) {
    const auto in = random_instance(rng, 80);
    std::vector<double> transformed, negated;
    for (double s : in.scores) {
      transformed.push_back(std::exp(3.0 * s) - 7.0);
      negated.push_back(-s);
    }
    const double auc = roc_auc(in.scores, in.labels);
    EXPECT_EQ(roc_auc(transformed, in.labels), auc);
    EXPECT_NEAR(auc + roc_auc(negated, in.labels), 1.0, 1e-12);
  }
}

TEST(RocAuc, SingleClassIsUndefined) {
  const std::vector<double> s{0.1, 0.2};
  EXPECT_TRUE(throws_code([&] { roc_auc(s, std::vector<int>{1, 1}); }, ErrorCode::kUndefinedMetric));
  EXPECT_TRUE(throws_code([&] { pr_auc(s, std::vector<int>{0, 0}); }, ErrorCode::kUndefinedMetric));
}

TEST(PrAuc, SinglePositiveRankedSecond) {
  EXPECT_EQ(pr_auc(std::vector<double>{0.2, 0.9}, std::vector<int>{1, 0}), 0.5);
}

TEST(PrAuc, MatchesThresholdSweep) {
  std::mt19937_64 rng(52);
  for (int t = 0; t < 200; ++t) {
    const auto in = random_instance(rng, 2 + t % 150, 2 + t % 30);
    ASSERT_NEAR(pr_auc(in.scores, in.labels), oracle::threshold_sweep_ap(in.scores, in.labels), 1e-12) << t;
  }
}

TEST(PrAuc, RandomScoresAverageThePrevalence) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double prevalence = 0.27;
  double total = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> s(1000);
    std::vector<int> y(1000);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = u(rng);
      y[i] = u(rng) < prevalence;
    }
    total += pr_auc(s, y);
  }
  EXPECT_NEAR(total / 200.0, prevalence, 0.03);
}

TEST(PrAuc, PerfectIffSeparated) {
  std::mt19937_64 rng(54);
  for (int t = 0; t < 50; ++t) {
    const auto in = random_instance(rng, 40);
    double min_pos = 1e9, max_neg = -1e9;
    for (std::size_t i = 0; i < in.scores.size(); ++i) {
      if (in.labels[i]) min_pos = std::min(min_pos, in.scores[i]);
      else max_neg = std::max(max_neg, in.scores[i]);
    }
    const bool separated = min_pos > max_neg;
    EXPECT_EQ(roc_auc(in.scores, in.labels) == 1.0, separated);
    EXPECT_EQ(pr_auc(in.scores, in.labels) == 1.0, separated);
  }
}

TEST(MultiClass, IdentityAndDegenerateCases) {
  const std::vector<int> truth{0, 1, 2, 1, 0};
  EXPECT_EQ(accuracy(truth, truth), 1.0);
  EXPECT_EQ(macro_f1(truth, truth), 1.0);

  const std::vector<int> t3{0, 1, 2};
  const std::vector<int> ones{1, 1, 1};
  const auto m = multiclass_metrics(ones, t3);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0 / 3.0);
  EXPECT_EQ(m.per_class[0].f1, 0.0);
  EXPECT_DOUBLE_EQ(m.per_class[1].f1, 0.5);
  EXPECT_EQ(m.per_class[2].f1, 0.0);
  EXPECT_DOUBLE_EQ(m.macro_f1, 1.0 / 6.0);
  EXPECT_EQ(m.confusion[0][1], 1u);
  EXPECT_EQ(m.confusion[2][1], 1u);
}

TEST(MultiClass, JointPermutationLeavesMetricsUnchanged) {
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<int> cls(0, 2);
  std::vector<int> p(60), t(60);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = cls(rng);
    t[i] = cls(rng);
  }
  const auto base = multiclass_metrics(p, t);
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> pp, tt;
  for (auto i : order) {
    pp.push_back(p[i]);
    tt.push_back(t[i]);
  }
  const auto shuffled = multiclass_metrics(pp, tt);
  EXPECT_EQ(shuffled.accuracy, base.accuracy);
  EXPECT_EQ(shuffled.macro_f1, base.macro_f1);
  EXPECT_EQ(shuffled.confusion, base.confusion);
}

TEST(MultiClass, BadInputsAreRejected) {
  EXPECT_TRUE(throws_code([] { accuracy(std::vector<int>{1, 2}, std::vector<int>{1}); }, ErrorCode::kShape));
  EXPECT_TRUE(throws_code([] { macro_f1(std::vector<int>{3}, std::vector<int>{1}); }, ErrorCode::kDomain));
}

TEST(Brier, ReferenceValues) {
  const std::vector<int> y{1, 0, 0, 1};
  EXPECT_EQ(brier(std::vector<double>{1.0, 0.0, 0.0, 1.0}, y), 0.0);
  EXPECT_EQ(brier(std::vector<double>(4, 0.5), y), 0.25);
  std::vector<int> labels(100, 0);
  for (int i = 0; i < 27; ++i) labels[i] = 1;
  EXPECT_NEAR(brier(std::vector<double>(100, 0.27), labels), 0.1971, 1e-12);
  EXPECT_TRUE(throws_code([&] { brier(std::vector<double>{1.2, 0.0, 0.0, 0.0}, y); }, ErrorCode::kDomain));
}

TEST(LogLoss, ClipsExtremeProbabilities) {
  const std::vector<int> y{1, 0};
  EXPECT_NEAR(log_loss(std::vector<double>{0.5, 0.5}, y), std::log(2.0), 1e-15);
  EXPECT_TRUE(std::isfinite(log_loss(std::vector<double>{0.0, 1.0}, y)));
}

TEST(CalibrationBins, TenEqualWidthBins) {
  const std::vector<double> p{0.05, 0.15, 0.12, 1.0, 0.95};
  const std::vector<int> y{0, 1, 0, 1, 1};
  const auto bins = calibration_bins(p, y);
  ASSERT_EQ(bins.size(), 10u);
  EXPECT_EQ(bins[0].count, 1u);
  EXPECT_EQ(bins[1].count, 2u);
  EXPECT_DOUBLE_EQ(bins[1].mean_predicted, 0.135);
  EXPECT_DOUBLE_EQ(bins[1].observed, 0.5);
  EXPECT_EQ(bins[9].count, 2u);
  EXPECT_EQ(bins[5].count, 0u);
  EXPECT_EQ(bins[5].observed, 0.0);
}

TEST(BinaryMetrics, ConfusionUsesTheThreshold) {
  const std::vector<double> p{0.9, 0.5, 0.4, 0.1};
  const std::vector<int> y{1, 0, 1, 0};
  const auto c = binary_confusion(p, y, 0.5);
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_EQ(c.tn, 1u);
  const auto m = binary_metrics(p, y);
  EXPECT_EQ(m.n, 4u);
  EXPECT_EQ(m.prevalence, 0.5);
  EXPECT_EQ(m.roc_auc, 0.75);
}

TEST(TemporalSplit, DefaultSpecGivesBalancedRoundSlices) {
  const auto data = generate_synthetic(GeneratorConfig{});
  const auto m = build_feature_matrix(fit_transforms(data, FeatureRecipe::defaults(), {1}), data);
  const auto split = temporal_split(m, SplitSpec{});
  EXPECT_EQ(split.train.rows(), 750u);
  EXPECT_EQ(split.validation.rows(), 750u);
  EXPECT_EQ(split.test.rows(), 750u);
  std::set<Key> train_keys(split.train.keys.begin(), split.train.keys.end());
  for (const auto* part : {&split.validation, &split.test}) {
    for (const auto& k : part->keys) EXPECT_FALSE(train_keys.contains(k));
  }

  const auto no_test = temporal_split(m, SplitSpec{{1, 2}, {3}, {}});
  EXPECT_EQ(no_test.train.rows(), 1500u);
  EXPECT_EQ(no_test.validation.rows(), 750u);
  EXPECT_EQ(no_test.test.rows(), 0u);
}

TEST(TemporalSplit, InvalidSpecsAreRejected) {
  EXPECT_TRUE(throws_code([] { SplitSpec{{1, 2}, {2}, {3}}.validate(); }, ErrorCode::kConfig));
  EXPECT_TRUE(throws_code([] { SplitSpec{{2}, {1}, {3}}.validate(); }, ErrorCode::kConfig));
  EXPECT_TRUE(throws_code([] { SplitSpec{{}, {1}, {2}}.validate(); }, ErrorCode::kConfig));
  const auto data = generate_synthetic(GeneratorConfig{.seed = 1, .n_households = 20});
  const auto m = build_feature_matrix(fit_transforms(data, FeatureRecipe{}, {1}), data);
  EXPECT_TRUE(throws_code([&] { temporal_split(m, SplitSpec{{1}, {2}, {4}}); }, ErrorCode::kConfig));
}

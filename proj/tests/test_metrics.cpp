#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "rstcoh.hpp"

using namespace rstcoh;

namespace {

std::vector<int> labels_from_counts(long c1, long c2, long c3) {
  std::vector<int> out;
  out.insert(out.end(), static_cast<std::size_t>(c1), 1);
  out.insert(out.end(), static_cast<std::size_t>(c2), 2);
  out.insert(out.end(), static_cast<std::size_t>(c3), 3);
  return out;
}

struct MajorityCase {
  const char* name;
  long c1, c2, c3;
  double accuracy_pct;
  double weighted_f1_pct;
};

}  // namespace

class MajorityRows : public ::testing::TestWithParam<MajorityCase> {};

TEST_P(MajorityRows, FixedCoherentPolicy) {
  const auto& c = GetParam();
  const auto test = labels_from_counts(c.c1, c.c2, c.c3);
  const auto r = majority_baseline("fixed:3", {}, test);
  EXPECT_NEAR(100.0 * r.accuracy, c.accuracy_pct, 0.01);
  EXPECT_NEAR(100.0 * r.weighted_f1, c.weighted_f1_pct, 0.01);
  EXPECT_EQ(r.per_class[0].precision, 0.0);
  EXPECT_EQ(r.per_class[0].f1, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Corpora, MajorityRows,
                         ::testing::Values(MajorityCase{"clinton", 50, 38, 109, 55.33, 39.42},
                                           MajorityCase{"enron", 59, 50, 87, 44.39, 27.29},
                                           MajorityCase{"yahoo", 78, 41, 73, 38.02, 20.95}),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(Majority, TrainArgmaxDiffersOnSkewedTestSet) {
  const auto test = labels_from_counts(78, 41, 73);
  const auto train = labels_from_counts(10, 5, 3);
  EXPECT_EQ(majority_class("train-argmax", train), 1);
  EXPECT_NEAR(100.0 * majority_baseline("train-argmax", train, test).accuracy, 40.63, 0.01);
}

TEST(Majority, TiesGoToLowestClass) {
  EXPECT_EQ(majority_class("train-argmax", labels_from_counts(4, 4, 4)), 1);
  EXPECT_EQ(majority_class("train-argmax", labels_from_counts(1, 4, 4)), 2);
  EXPECT_EQ(majority_class("train-argmax", {}), 1);
}

TEST(Majority, UnknownPolicyIsConfigError) {
  EXPECT_THROW(majority_class("fixed:4", {}), ConfigError);
  EXPECT_THROW(majority_class("mode", {}), ConfigError);
}

TEST(Report, EmptyIsAnError) {
  EXPECT_THROW(report(ConfusionMatrix{}), EmptyEvaluationError);
  EXPECT_THROW(majority_baseline("fixed:3", {}, {}), EmptyEvaluationError);
}

TEST(Report, HandComputedConfusion) {
  ConfusionMatrix cm;
  // truth 1: 3 right, 1 as class 2; truth 2: 2 right; truth 3: 1 as class 1, 3 right
  for (int k = 0; k < 3; ++k) cm.add(1, 1);
  cm.add(1, 2);
  cm.add(2, 2);
  cm.add(2, 2);
  cm.add(3, 1);
  for (int k = 0; k < 3; ++k) cm.add(3, 3);
  const auto r = report(cm);
  EXPECT_DOUBLE_EQ(r.accuracy, 8.0 / 10.0);
  EXPECT_DOUBLE_EQ(r.per_class[0].precision, 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(r.per_class[0].recall, 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(r.per_class[1].precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.per_class[1].recall, 1.0);
  EXPECT_DOUBLE_EQ(r.per_class[2].precision, 1.0);
  EXPECT_DOUBLE_EQ(r.per_class[2].recall, 3.0 / 4.0);
  const double f2 = 0.8, f3 = 6.0 / 7.0, f1 = 0.75;
  EXPECT_NEAR(r.macro_f1, (f1 + f2 + f3) / 3.0, 1e-15);
  EXPECT_NEAR(r.weighted_f1, (4 * f1 + 2 * f2 + 4 * f3) / 10.0, 1e-15);
}

TEST(Report, AccuracyEqualsSupportWeightedRecallAndIsPermutationInvariant) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> cls(1, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<int> truth(n), pred(n);
    for (std::size_t k = 0; k < n; ++k) {
      truth[k] = cls(rng);
      pred[k] = cls(rng);
    }
    const auto r = report(truth, pred);
    double weighted_recall = 0.0;
    for (const auto& s : r.per_class) weighted_recall += s.recall * static_cast<double>(s.support);
    EXPECT_NEAR(r.accuracy, weighted_recall / static_cast<double>(n), 1e-12);
    EXPECT_GE(r.macro_f1, 0.0);
    EXPECT_LE(r.weighted_f1, 1.0);

    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < n; ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> t2(n), p2(n);
    for (std::size_t k = 0; k < n; ++k) {
      t2[k] = truth[order[k]];
      p2[k] = pred[order[k]];
    }
    const auto r2 = report(t2, p2);
    EXPECT_EQ(r2.accuracy, r.accuracy);
    EXPECT_EQ(r2.macro_f1, r.macro_f1);
    EXPECT_EQ(r2.weighted_f1, r.weighted_f1);
  }
}

TEST(Report, LengthMismatchIsDimensionError) {
  const std::vector<int> a{1, 2}, b{1};
  EXPECT_THROW(report(a, b), DimensionError);
}

TEST(ConfidenceInterval, TwoPoints) {
  const std::vector<double> v{0.0, 1.0};
  const auto ci = confidence_interval(v);
  EXPECT_DOUBLE_EQ(ci.mean, 0.5);
  EXPECT_NEAR(ci.halfwidth, 0.980, 1e-3);
  EXPECT_EQ(ci.n, 2u);
}

TEST(ConfidenceInterval, ScaledBySampleStd) {
  // alternating values give a sample std that is easy to set exactly
  const std::size_t n = 1000;
  std::vector<double> v(n);
  const double a = 1.452 * std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) v[k] = 40.0 + (k % 2 == 0 ? a : -a);
  const auto ci = confidence_interval(v);
  EXPECT_NEAR(ci.mean, 40.0, 1e-9);
  EXPECT_NEAR(ci.halfwidth, 0.090, 1e-3);
}

TEST(ConfidenceInterval, SingleValueHasZeroWidth) {
  const std::vector<double> v{0.37};
  const auto ci = confidence_interval(v);
  EXPECT_EQ(ci.mean, 0.37);
  EXPECT_EQ(ci.halfwidth, 0.0);
  EXPECT_THROW(confidence_interval(std::span<const double>{}), EmptyEvaluationError);
}

TEST(Serialization, JsonAndCsvCarryTheSameNumbers) {
  const auto r = majority_baseline("fixed:3", {}, labels_from_counts(50, 38, 109));
  const auto j = to_json(r);
  EXPECT_DOUBLE_EQ(j["accuracy"].get<double>(), r.accuracy);
  EXPECT_DOUBLE_EQ(j["weighted_f1"].get<double>(), r.weighted_f1);
  const auto header = csv_header();
  const auto row = to_csv_row(r);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
}

// Copyright 2026 The Fundus Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fundus/metrics.hpp"

#include <gtest/gtest.h>

#include "fundus/random.hpp"
#include "support/oracles.hpp"

namespace fundus {
namespace {

using V = std::vector<double>;
using L = std::vector<int>;

TEST(MaeTest, Examples) {
  EXPECT_EQ(mae(V{1, 2, 3}, V{1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(mae(V{1, 2}, V{2, 4}), 1.5);
  EXPECT_THROW(mae(V{1}, V{1, 2}), Error);
  EXPECT_THROW(mae(V{}, V{}), Error);
}

TEST(R2Test, Examples) {
  EXPECT_DOUBLE_EQ(r2(V{1, 2, 5}, V{1, 2, 5}), 1.0);
  EXPECT_NEAR(r2(V{2, 2, 2}, V{1, 2, 3}), 0.0, 1e-15);
  EXPECT_NEAR(oracle::r2({2, 2}, {0, 1}), -9.0, 1e-12);
  EXPECT_DOUBLE_EQ(r2(V{2, 2}, V{0, 1}), -9.0);
  EXPECT_THROW(r2(V{1, 2}, V{3, 3}), Error);
  EXPECT_THROW(r2(V{1}, V{3}), Error);
}

TEST(RocAucTest, Examples) {
  EXPECT_DOUBLE_EQ(roc_auc(V{0.1, 0.2, 0.8, 0.9}, L{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(V{0.1, 0.2, 0.8, 0.9}, L{1, 1, 0, 0}), 0.0);
  const V s{0.1, 0.4, 0.35, 0.8};
  const L y{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(oracle::roc_auc(s, y), 0.75);
  EXPECT_DOUBLE_EQ(roc_auc(s, y), 0.75);
  EXPECT_DOUBLE_EQ(roc_auc(V{0.5, 0.5}, L{0, 1}), 0.5);
  EXPECT_THROW(roc_auc(V{0.1, 0.2}, L{1, 1}), Error);
}

TEST(PrAucTest, Examples) {
  EXPECT_DOUBLE_EQ(pr_auc(V{0.1, 0.2, 0.8, 0.9}, L{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(pr_auc(V(10, 0.3), L{1, 1, 1, 0, 0, 0, 0, 0, 0, 0}), 0.3);
  const V s{0.9, 0.8, 0.7, 0.6};
  const L y{1, 0, 1, 0};
  EXPECT_NEAR(oracle::average_precision(s, y), 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(pr_auc(s, y), 5.0 / 6.0, 1e-12);
  EXPECT_THROW(pr_auc(V{0.1, 0.2}, L{0, 0}), Error);
}

TEST(ThresholdMetricsTest, Examples) {
  const auto m = threshold_metrics(V{0.6, 0.4, 0.7, 0.2}, L{1, 0, 0, 0});
  const auto o = oracle::confusion({0.6, 0.4, 0.7, 0.2}, {1, 0, 0, 0}, 0.5);
  EXPECT_DOUBLE_EQ(o.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(*m.precision, 0.5);
  EXPECT_DOUBLE_EQ(*m.recall, 1.0);

  const auto perfect = threshold_metrics(V{0.9, 0.1}, L{1, 0});
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);

  const auto negative = threshold_metrics(V{0.1, 0.2, 0.3}, L{1, 0, 1});
  EXPECT_FALSE(negative.precision.has_value());
  EXPECT_EQ(negative.recall, 0.0);
}

TEST(ThresholdMetricsTest, TinyThresholdGivesFullRecall) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    V s(40);
    L y(40);
    for (int i = 0; i < 40; ++i) {
      s[i] = rng.uniform();
      y[i] = rng.bernoulli(0.3);
    }
    y[0] = 1;
    EXPECT_EQ(threshold_metrics(s, y, 1e-300).recall, 1.0);
  }
}

TEST(BaselineTest, Continuous) {
  const auto b = baseline_continuous(V{1, 3});
  EXPECT_DOUBLE_EQ(b.mae_baseline, 1.0);
  EXPECT_EQ(b.r2_baseline, 0.0);
  EXPECT_EQ(baseline_continuous(V{4, 4, 4}).mae_baseline, 0.0);
  EXPECT_THROW(r2(V{4, 4, 4}, V{4, 4, 4}), Error);
  EXPECT_THROW(baseline_continuous(V{}), Error);
}

TEST(BaselineTest, MeanPredictorHasZeroR2) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    V truth(2 + rng.below(100));
    for (auto& t : truth) t = rng.normal(50, 10);
    double mean = 0;
    for (double t : truth) mean += t;
    mean /= truth.size();
    EXPECT_NEAR(r2(V(truth.size(), mean), truth), 0.0, 1e-12);
    double mad = 0;
    for (double t : truth) mad += std::abs(t - mean);
    EXPECT_NEAR(baseline_continuous(truth).mae_baseline, mad / truth.size(), 1e-12);
  }
}

TEST(RocAucTest, InvariantUnderMonotoneTransformAndComplement) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(150);
    V s(n);
    L y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(rng.uniform() * 20) / 20;
      y[i] = rng.bernoulli(0.4);
    }
    y[0] = 0;
    y[1] = 1;
    V t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3 * s[i]) - 7;
    L flipped(n);
    for (std::size_t i = 0; i < n; ++i) flipped[i] = 1 - y[i];
    const double a = roc_auc(s, y);
    EXPECT_NEAR(roc_auc(t, y), a, 1e-12);
    EXPECT_NEAR(a + roc_auc(s, flipped), 1.0, 1e-12);
  }
}

TEST(MetricsOracleTest, RandomInstances) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    V pred(n), truth(n), scores(n);
    L labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = rng.normal(100, 15);
      pred[i] = truth[i] + rng.normal(0, 10);
      scores[i] = std::round(rng.uniform() * 50) / 50;
      labels[i] = rng.bernoulli(0.35);
    }
    labels[0] = 1;
    labels[1] = 0;
    EXPECT_NEAR(mae(pred, truth), oracle::mae(pred, truth), 1e-9);
    EXPECT_NEAR(r2(pred, truth), oracle::r2(pred, truth), 1e-9);
    EXPECT_NEAR(roc_auc(scores, labels), oracle::roc_auc(scores, labels), 1e-9);
    EXPECT_NEAR(pr_auc(scores, labels), oracle::average_precision(scores, labels), 1e-9);
    const auto m = threshold_metrics(scores, labels, 0.5);
    const auto o = oracle::confusion(scores, labels, 0.5);
    EXPECT_NEAR(m.accuracy, o.accuracy, 1e-12);
    EXPECT_EQ(m.precision.has_value(), o.precision.has_value());
    if (m.precision) {
      EXPECT_NEAR(*m.precision, *o.precision, 1e-12);
    }
    EXPECT_NEAR(*m.recall, *o.recall, 1e-12);
  }
}

}  // namespace
}  // namespace fundus

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

#pragma once

// Regression and binary-classification metrics. Labels are 0/1 ints; scores
// are arbitrary reals (higher = more positive).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fundus/error.hpp"

namespace fundus {

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw Error(Errc::LengthMismatch, std::string(op) + ": " + std::to_string(a) + " vs " +
                                          std::to_string(b) + " values");
  }
  if (a == 0) throw Error(Errc::Empty, std::string(op) + ": no values");
}

inline void count_classes(std::span<const int> labels, std::size_t& pos, std::size_t& neg) {
  pos = neg = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw Error(Errc::UnparseableValue, "labels must be 0 or 1");
    (l ? pos : neg) += 1;
  }
}

/// Indices sorted by descending score; ties keep index order.
inline std::vector<std::size_t> order_descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace detail

inline double mae(std::span<const double> pred, std::span<const double> truth) {
  detail::require_same_length(pred.size(), truth.size(), "mae");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - truth[i]);
  return sum / static_cast<double>(pred.size());
}

/// Coefficient of determination 1 - SS_res / SS_tot.
inline double r2(std::span<const double> pred, std::span<const double> truth) {
  detail::require_same_length(pred.size(), truth.size(), "r2");
  if (truth.size() < 2) throw Error(Errc::Empty, "r2: need at least two values");
  const double mean =
      std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) throw Error(Errc::ZeroVariance, "r2: truth has zero variance");
  return 1.0 - ss_res / ss_tot;
}

/// Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 * P(tie).
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  detail::require_same_length(scores.size(), labels.size(), "roc_auc");
  std::size_t pos = 0, neg = 0;
  detail::count_classes(labels, pos, neg);
  if (pos == 0 || neg == 0) throw Error(Errc::OneClassOnly, "roc_auc: need both classes");

  // Walk ascending score groups; each positive gains the negatives strictly
  // below it plus half of the tied negatives.
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double wins = 0.0;
  double neg_below = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    double group_pos = 0.0, group_neg = 0.0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? group_pos : group_neg) += 1.0;
      ++j;
    }
    wins += group_pos * (neg_below + 0.5 * group_neg);
    neg_below += group_neg;
    i = j;
  }
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

/// Average precision: sum over distinct thresholds of
/// (recall_k - recall_{k-1}) * precision_k, tied scores forming one step.
inline double pr_auc(std::span<const double> scores, std::span<const int> labels) {
  detail::require_same_length(scores.size(), labels.size(), "pr_auc");
  std::size_t pos = 0, neg = 0;
  detail::count_classes(labels, pos, neg);
  if (pos == 0) throw Error(Errc::NoPositives, "pr_auc: no positive labels");

  const auto idx = detail::order_descending(scores);
  double tp = 0.0, fp = 0.0, ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? tp : fp) += 1.0;
      ++j;
    }
    const double recall = tp / static_cast<double>(pos);
    ap += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
    i = j;
  }
  return ap;
}

struct ThresholdMetrics {
  double accuracy = 0.0;
  /// Missing when nothing is predicted positive.
  std::optional<double> precision;
  /// Missing when there are no positive labels.
  std::optional<double> recall;
};

/// Confusion-matrix ratios with "positive iff score >= tau".
inline ThresholdMetrics threshold_metrics(std::span<const double> scores,
                                          std::span<const int> labels, double tau = 0.5) {
  detail::require_same_length(scores.size(), labels.size(), "threshold_metrics");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error(Errc::UnparseableValue, "labels must be 0 or 1");
    const bool predicted = scores[i] >= tau;
    if (predicted) {
      (labels[i] ? tp : fp) += 1;
    } else {
      (labels[i] ? fn : tn) += 1;
    }
  }
  ThresholdMetrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return m;
}

struct ContinuousBaseline {
  /// MAE of the constant evaluation-set-mean predictor (the mean absolute
  /// deviation of the truth).
  double mae_baseline = 0.0;
  /// R^2 of that predictor, zero by construction.
  double r2_baseline = 0.0;
};

inline ContinuousBaseline baseline_continuous(std::span<const double> truth) {
  if (truth.empty()) throw Error(Errc::Empty, "baseline_continuous: no values");
  const double mean =
      std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  const std::vector<double> constant(truth.size(), mean);
  return {mae(constant, truth), 0.0};
}

/// Baseline for AUC: a random ranking.
inline constexpr double kAucBaseline = 0.5;

}  // namespace fundus

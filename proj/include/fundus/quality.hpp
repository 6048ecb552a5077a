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

// Image-quality gate: thresholding of quality probabilities, the both-eyes
// keep rule and a Pearson chi-square test of the left/right good rates.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fundus/csv.hpp"
#include "fundus/dataset.hpp"
#include "fundus/error.hpp"
#include "fundus/eye.hpp"

namespace fundus {

inline constexpr double kDefaultQualityThreshold = 0.5;

struct QualityScore {
  std::string participant_id;
  Eye eye = Eye::Left;
  double score = 0.0;
};

enum class QualityLabel { Good, Bad };

constexpr std::string_view to_string(QualityLabel l) {
  return l == QualityLabel::Good ? "good" : "bad";
}

using ImageKey = std::pair<std::string, Eye>;
using QualityLabels = std::map<ImageKey, QualityLabel>;

/// score >= tau is good. tau must lie in (0, 1).
inline QualityLabels apply_threshold(std::span<const QualityScore> scores,
                                     double tau = kDefaultQualityThreshold) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(Errc::BadThreshold, "quality threshold must lie in (0, 1)");
  }
  QualityLabels out;
  for (const auto& s : scores) {
    if (s.eye == Eye::Fused) {
      throw Error(Errc::UnparseableValue, "quality scores are per eye");
    }
    const auto label = s.score >= tau ? QualityLabel::Good : QualityLabel::Bad;
    if (!out.emplace(ImageKey{s.participant_id, s.eye}, label).second) {
      throw Error(Errc::DuplicateParticipant,
                  "two quality scores for " + s.participant_id + "/" +
                      std::string(to_string(s.eye)));
    }
  }
  return out;
}

/// Images present in `records` that have no label.
inline std::vector<ImageKey> missing_labels(std::span<const ParticipantRecord> records,
                                            const QualityLabels& labels) {
  std::vector<ImageKey> gaps;
  for (const auto& r : records) {
    if (r.left_image && !labels.contains({r.participant_id, Eye::Left}))
      gaps.emplace_back(r.participant_id, Eye::Left);
    if (r.right_image && !labels.contains({r.participant_id, Eye::Right}))
      gaps.emplace_back(r.participant_id, Eye::Right);
  }
  return gaps;
}

/// Keeps a participant iff both images exist and both are labelled good.
/// Throws Errc::MissingScore if an existing image has no label.
inline std::vector<ParticipantRecord> filter_both_eyes_good(
    std::span<const ParticipantRecord> records, const QualityLabels& labels) {
  const auto gaps = missing_labels(records, labels);
  if (!gaps.empty()) {
    std::string msg = std::to_string(gaps.size()) + " image(s) without a quality label:";
    for (const auto& [id, eye] : gaps) msg += " " + id + "/" + std::string(to_string(eye));
    throw Error(Errc::MissingScore, msg);
  }
  std::vector<ParticipantRecord> kept;
  for (const auto& r : records) {
    if (!r.left_image || !r.right_image) continue;
    if (labels.at({r.participant_id, Eye::Left}) == QualityLabel::Good &&
        labels.at({r.participant_id, Eye::Right}) == QualityLabel::Good) {
      kept.push_back(r);
    }
  }
  return kept;
}

/// Rows are eye sides (left, right); columns are (good, bad).
struct ContingencyTable2x2 {
  std::uint64_t a = 0;  // left good
  std::uint64_t b = 0;  // left bad
  std::uint64_t c = 0;  // right good
  std::uint64_t d = 0;  // right bad
};

/// Counts labels over participants that have both images.
inline ContingencyTable2x2 quality_table(std::span<const ParticipantRecord> records,
                                         const QualityLabels& labels) {
  ContingencyTable2x2 t;
  for (const auto& r : records) {
    if (!r.left_image || !r.right_image) continue;
    const auto l = labels.find({r.participant_id, Eye::Left});
    const auto rr = labels.find({r.participant_id, Eye::Right});
    if (l == labels.end() || rr == labels.end()) continue;
    (l->second == QualityLabel::Good ? t.a : t.b) += 1;
    (rr->second == QualityLabel::Good ? t.c : t.d) += 1;
  }
  return t;
}

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 1;
};

/// Survival function of the chi-square distribution with one degree of
/// freedom: P(X > x) = erfc(sqrt(x / 2)).
inline double chi_square_sf_1dof(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(0.5 * x));
}

/// Pearson chi-square without continuity correction.
inline ChiSquareResult chi_square_independence(const ContingencyTable2x2& t) {
  const double a = static_cast<double>(t.a), b = static_cast<double>(t.b);
  const double c = static_cast<double>(t.c), d = static_cast<double>(t.d);
  const double row1 = a + b, row2 = c + d, col1 = a + c, col2 = b + d;
  const double n = row1 + row2;
  if (row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0) {
    throw Error(Errc::DegenerateTable, "contingency table has a zero marginal");
  }
  const double observed[4] = {a, b, c, d};
  const double expected[4] = {row1 * col1 / n, row1 * col2 / n, row2 * col1 / n,
                              row2 * col2 / n};
  ChiSquareResult r;
  r.statistic = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double diff = observed[i] - expected[i];
    r.statistic += diff * diff / expected[i];
  }
  r.p_value = chi_square_sf_1dof(r.statistic);
  return r;
}

// Files ------------------------------------------------------------------------

inline std::vector<QualityScore> read_quality_scores(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  csv::require_header(table, {"participant_id", "eye", "score"}, "quality scores");
  std::vector<QualityScore> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto where = path.string() + " line " + std::to_string(table.line_numbers[i]);
    if (row.size() != 3) throw Error(Errc::UnparseableValue, where + ": expected 3 fields");
    const auto eye = parse_eye(row[1]);
    const auto score = csv::parse_double(row[2]);
    if (!eye || *eye == Eye::Fused) throw Error(Errc::UnparseableValue, where + ": eye must be L or R");
    if (!score || !(*score >= 0.0 && *score <= 1.0)) {
      throw Error(Errc::UnparseableValue, where + ": score must be a probability");
    }
    out.push_back({row[0], *eye, *score});
  }
  return out;
}

inline void write_quality_scores(std::ostream& out, std::span<const QualityScore> scores) {
  csv::write_row(out, {"participant_id", "eye", "score"});
  for (const auto& s : scores) {
    csv::write_row(out, {s.participant_id, std::string(to_string(s.eye)), csv::format_double(s.score)});
  }
}

inline void write_gate_decisions(std::ostream& out, const QualityLabels& labels) {
  csv::write_row(out, {"participant_id", "eye", "label"});
  for (const auto& [key, label] : labels) {
    csv::write_row(out, {key.first, std::string(to_string(key.second)), std::string(to_string(label))});
  }
}

}  // namespace fundus

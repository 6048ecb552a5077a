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

// Prediction records and left/right fusion.

#include <cmath>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fundus/csv.hpp"
#include "fundus/error.hpp"
#include "fundus/eye.hpp"
#include "fundus/task.hpp"

namespace fundus {

struct PredictionRecord {
  std::string participant_id;
  Eye eye = Eye::Left;
  Task task = Task::Age;
  double value = 0.0;
  std::string model_id;
  std::string split;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// Mean of a left and a right prediction for the same participant and task.
inline PredictionRecord fuse_pair(const PredictionRecord& left, const PredictionRecord& right) {
  if (left.participant_id != right.participant_id || left.task != right.task ||
      left.eye != Eye::Left || right.eye != Eye::Right) {
    throw Error(Errc::MismatchedPair, "cannot fuse " + left.participant_id + "/" +
                                          std::string(to_string(left.eye)) + " with " +
                                          right.participant_id + "/" +
                                          std::string(to_string(right.eye)));
  }
  PredictionRecord out = left;
  out.eye = Eye::Fused;
  out.value = 0.5 * (left.value + right.value);
  return out;
}

struct FuseResult {
  std::vector<PredictionRecord> fused;
  /// (participant, task) groups with only one eye.
  std::size_t skipped = 0;
};

/// One fused record per (participant, task) that has both eyes, ordered by
/// participant then task. Input FUSED rows are ignored.
inline FuseResult fuse_all(std::span<const PredictionRecord> predictions) {
  struct Pair {
    const PredictionRecord* left = nullptr;
    const PredictionRecord* right = nullptr;
  };
  std::map<std::tuple<std::string, Task>, Pair> groups;
  for (const auto& p : predictions) {
    if (p.eye == Eye::Fused) continue;
    Pair& g = groups[{p.participant_id, p.task}];
    const PredictionRecord*& slot = p.eye == Eye::Left ? g.left : g.right;
    if (slot) {
      throw Error(Errc::DuplicatePrediction,
                  "two " + std::string(to_string(p.eye)) + " predictions for " +
                      p.participant_id + "/" + std::string(to_string(p.task)));
    }
    slot = &p;
  }
  FuseResult r;
  for (const auto& [key, g] : groups) {
    if (g.left && g.right) {
      r.fused.push_back(fuse_pair(*g.left, *g.right));
    } else {
      ++r.skipped;
    }
  }
  return r;
}

inline const csv::Row& predictions_header() {
  static const csv::Row header{"participant_id", "eye", "task", "value", "model_id", "split"};
  return header;
}

inline std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  csv::require_header(table, predictions_header(), "predictions");
  std::vector<PredictionRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto where = path.string() + " line " + std::to_string(table.line_numbers[i]);
    if (row.size() != 6) throw Error(Errc::UnparseableValue, where + ": expected 6 fields");
    const auto eye = parse_eye(row[1]);
    const auto task = parse_task(row[2]);
    const auto value = csv::parse_double(row[3]);
    if (!eye) throw Error(Errc::UnparseableValue, where + ": bad eye '" + row[1] + "'");
    if (!task) throw Error(Errc::UnparseableValue, where + ": bad task '" + row[2] + "'");
    if (!value || !std::isfinite(*value)) {
      throw Error(Errc::UnparseableValue, where + ": bad value '" + row[3] + "'");
    }
    if (is_classification(*task) && !(*value >= 0.0 && *value <= 1.0)) {
      throw Error(Errc::UnparseableValue, where + ": classification value outside [0, 1]");
    }
    out.push_back({row[0], *eye, *task, *value, row[4], row[5]});
  }
  return out;
}

inline void write_predictions(std::ostream& out, std::span<const PredictionRecord> records) {
  csv::write_row(out, predictions_header());
  for (const auto& p : records) {
    csv::write_row(out, {p.participant_id, std::string(to_string(p.eye)),
                         std::string(to_string(p.task)), csv::format_double(p.value), p.model_id,
                         p.split});
  }
}

}  // namespace fundus

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

// Participant manifest, label construction, splitting and class-imbalance
// helpers.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fundus/csv.hpp"
#include "fundus/error.hpp"
#include "fundus/random.hpp"
#include "fundus/task.hpp"

namespace fundus {

enum class Sex { Male, Female };

struct ParticipantRecord {
  std::string participant_id;
  std::optional<std::string> left_image;
  std::optional<std::string> right_image;
  std::optional<double> age;
  std::optional<Sex> sex;
  std::optional<std::string> smoking_raw;
  // Possibly repeated readings; empty means missing.
  std::vector<double> bmi;
  std::vector<double> sbp;
  std::vector<double> dbp;
  std::vector<double> hba1c;
  std::vector<double> cholesterol;
  std::optional<std::string> ethnicity;
  std::optional<bool> british_irish;
};

inline const csv::Row& manifest_header() {
  static const csv::Row header{"participant_id", "left_image", "right_image", "age",
                               "sex",            "smoking",    "bmi",         "sbp",
                               "dbp",            "hba1c",      "cholesterol", "ethnicity"};
  return header;
}

struct ManifestOptions {
  /// Lower-cased ethnicity strings that count as British/Irish.
  std::vector<std::string> british_irish_values{"british", "irish"};
};

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Arithmetic mean of repeated readings.
inline double aggregate_measurements(std::span<const double> readings) {
  if (readings.empty()) throw Error(Errc::EmptyReadings, "no readings to aggregate");
  return std::accumulate(readings.begin(), readings.end(), 0.0) /
         static_cast<double>(readings.size());
}

/// "current" -> 1, "never"/"previous" -> 0, anything else -> missing.
inline std::optional<int> binarize_smoking(std::optional<std::string_view> raw) {
  if (!raw) return std::nullopt;
  const std::string v = to_lower(*raw);
  if (v == "current") return 1;
  if (v == "never" || v == "previous") return 0;
  return std::nullopt;
}

/// Ground-truth value of `task` for one participant (sex: male = 1).
inline std::optional<double> task_truth(const ParticipantRecord& r, Task task) {
  auto mean_of = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    return aggregate_measurements(v);
  };
  switch (task) {
    case Task::Age: return r.age;
    case Task::Sex:
      if (!r.sex) return std::nullopt;
      return *r.sex == Sex::Male ? 1.0 : 0.0;
    case Task::Smoking: {
      const auto s = binarize_smoking(r.smoking_raw ? std::optional<std::string_view>(*r.smoking_raw)
                                                    : std::nullopt);
      if (!s) return std::nullopt;
      return static_cast<double>(*s);
    }
    case Task::Bmi: return mean_of(r.bmi);
    case Task::Sbp: return mean_of(r.sbp);
    case Task::Dbp: return mean_of(r.dbp);
    case Task::Hba1c: return mean_of(r.hba1c);
    case Task::Cholesterol: return mean_of(r.cholesterol);
    case Task::Quality: return std::nullopt;
  }
  return std::nullopt;
}

/// Records that have a label for `task`; the others stay available for
/// other tasks.
inline std::vector<ParticipantRecord> training_view(std::span<const ParticipantRecord> records,
                                                    Task task) {
  std::vector<ParticipantRecord> out;
  for (const auto& r : records) {
    if (task_truth(r, task)) out.push_back(r);
  }
  return out;
}

/// Parses a manifest. Row-level problems are collected and reported together
/// in a single Errc::UnparseableValue error.
inline std::vector<ParticipantRecord> parse_manifest(std::istream& in,
                                                     const ManifestOptions& opts = {}) {
  const csv::Table table = csv::read(in);
  csv::require_header(table, manifest_header(), "manifest");

  std::set<std::string> british;
  for (const auto& v : opts.british_irish_values) british.insert(to_lower(v));

  std::vector<ParticipantRecord> records;
  std::set<std::string> seen;
  std::vector<std::string> problems;

  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const csv::Row& row = table.rows[i];
    const std::string where = "line " + std::to_string(table.line_numbers[i]);
    if (row.size() != manifest_header().size()) {
      problems.push_back(where + ": expected " + std::to_string(manifest_header().size()) +
                         " fields, got " + std::to_string(row.size()));
      continue;
    }
    auto opt = [](const std::string& s) -> std::optional<std::string> {
      if (s.empty()) return std::nullopt;
      return s;
    };
    auto readings = [&](const std::string& cell, const char* column) {
      std::vector<double> out;
      if (cell.empty()) return out;
      std::string_view rest = cell;
      while (true) {
        const auto bar = rest.find('|');
        const auto part = rest.substr(0, bar);
        const auto v = csv::parse_double(part);
        if (!v || !std::isfinite(*v)) {
          problems.push_back(where + ": column " + column + ": cannot parse '" +
                             std::string(part) + "'");
          return std::vector<double>{};
        }
        out.push_back(*v);
        if (bar == std::string_view::npos) break;
        rest.remove_prefix(bar + 1);
      }
      return out;
    };

    ParticipantRecord r;
    r.participant_id = row[0];
    if (r.participant_id.empty()) {
      problems.push_back(where + ": empty participant_id");
      continue;
    }
    if (!seen.insert(r.participant_id).second) {
      throw Error(Errc::DuplicateParticipant,
                  where + ": participant '" + r.participant_id + "' appears twice");
    }
    r.left_image = opt(row[1]);
    r.right_image = opt(row[2]);
    if (!row[3].empty()) {
      const auto age = csv::parse_double(row[3]);
      if (!age) {
        problems.push_back(where + ": column age: cannot parse '" + row[3] + "'");
      } else {
        r.age = age;
      }
    }
    if (!row[4].empty()) {
      const std::string s = to_lower(row[4]);
      if (s == "male" || s == "m") {
        r.sex = Sex::Male;
      } else if (s == "female" || s == "f") {
        r.sex = Sex::Female;
      } else {
        problems.push_back(where + ": column sex: unknown value '" + row[4] + "'");
      }
    }
    r.smoking_raw = opt(row[5]);
    r.bmi = readings(row[6], "bmi");
    r.sbp = readings(row[7], "sbp");
    r.dbp = readings(row[8], "dbp");
    r.hba1c = readings(row[9], "hba1c");
    r.cholesterol = readings(row[10], "cholesterol");
    r.ethnicity = opt(row[11]);
    if (r.ethnicity) r.british_irish = british.contains(to_lower(*r.ethnicity));
    records.push_back(std::move(r));
  }

  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " unparseable value(s)";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(Errc::UnparseableValue, msg);
  }
  return records;
}

inline std::vector<ParticipantRecord> load_manifest(const std::filesystem::path& path,
                                                    const ManifestOptions& opts = {}) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::Io, "cannot open manifest " + path.string());
  return parse_manifest(f, opts);
}

inline void write_manifest(std::ostream& out, std::span<const ParticipantRecord> records) {
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += '|';
      s += csv::format_double(v[i]);
    }
    return s;
  };
  csv::write_row(out, manifest_header());
  for (const auto& r : records) {
    csv::write_row(out, {r.participant_id, r.left_image.value_or(""), r.right_image.value_or(""),
                         r.age ? csv::format_double(*r.age) : "",
                         r.sex ? (*r.sex == Sex::Male ? "male" : "female") : "",
                         r.smoking_raw.value_or(""), join(r.bmi), join(r.sbp), join(r.dbp),
                         join(r.hba1c), join(r.cholesterol), r.ethnicity.value_or("")});
  }
}

// Splitting ------------------------------------------------------------------

enum class Subset { Train, Val, Test };

constexpr std::string_view to_string(Subset s) {
  switch (s) {
    case Subset::Train: return "train";
    case Subset::Val: return "val";
    case Subset::Test: return "test";
  }
  return "?";
}

inline std::optional<Subset> parse_subset(std::string_view s) {
  if (s == "train") return Subset::Train;
  if (s == "val") return Subset::Val;
  if (s == "test") return Subset::Test;
  return std::nullopt;
}

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

inline void validate_ratios(const SplitRatios& r) {
  const bool finite = std::isfinite(r.train) && std::isfinite(r.val) && std::isfinite(r.test);
  if (!finite || r.train < 0 || r.val < 0 || r.test < 0 ||
      std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
    throw Error(Errc::BadRatios, "split ratios must be non-negative and sum to 1");
  }
}

struct SplitAssignment {
  std::map<std::string, Subset> subset;
  SplitRatios ratios;
  std::uint64_t seed = 0;

  std::size_t count(Subset s) const {
    return static_cast<std::size_t>(std::count_if(
        subset.begin(), subset.end(), [s](const auto& kv) { return kv.second == s; }));
  }
};

namespace detail {

// Sorted, shuffled, then cut: val and test get floor(ratio * n) items each and
// train takes the remainder.
inline void assign_block(std::vector<std::string> ids, const SplitRatios& ratios,
                         std::uint64_t seed, std::map<std::string, Subset>& out) {
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(ids);
  const std::size_t n = ids.size();
  const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * static_cast<double>(n) + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(ratios.test * static_cast<double>(n) + 1e-9));
  const std::size_t n_train = n - n_val - n_test;
  for (std::size_t i = 0; i < n; ++i) {
    const Subset s = i < n_train ? Subset::Train
                     : i < n_train + n_val ? Subset::Val
                                           : Subset::Test;
    out[ids[i]] = s;
  }
}

}  // namespace detail

/// Person-level split: every id lands in exactly one subset. The result does
/// not depend on input order.
inline SplitAssignment grouped_split(std::span<const std::string> participant_ids,
                                     const SplitRatios& ratios, std::uint64_t seed) {
  validate_ratios(ratios);
  std::set<std::string> unique;
  for (const auto& id : participant_ids) {
    if (!unique.insert(id).second) {
      throw Error(Errc::DuplicateParticipant, "participant '" + id + "' listed twice");
    }
  }
  SplitAssignment a;
  a.ratios = ratios;
  a.seed = seed;
  detail::assign_block({participant_ids.begin(), participant_ids.end()}, ratios, seed, a.subset);
  return a;
}

inline SplitAssignment grouped_split(std::span<const ParticipantRecord> records,
                                     const SplitRatios& ratios, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.participant_id);
  return grouped_split(ids, ratios, seed);
}

struct StratifiedItem {
  std::string id;
  std::string stratum;
};

/// grouped_split run independently inside each stratum (same seed for every
/// stratum, so a single stratum reduces to grouped_split).
inline SplitAssignment stratified_split(std::span<const StratifiedItem> items,
                                        const SplitRatios& ratios, std::uint64_t seed) {
  validate_ratios(ratios);
  std::map<std::string, std::vector<std::string>> strata;
  std::set<std::string> unique;
  for (const auto& item : items) {
    if (!unique.insert(item.id).second) {
      throw Error(Errc::DuplicateParticipant, "item '" + item.id + "' listed twice");
    }
    strata[item.stratum].push_back(item.id);
  }
  SplitAssignment a;
  a.ratios = ratios;
  a.seed = seed;
  for (auto& [stratum, ids] : strata) detail::assign_block(std::move(ids), ratios, seed, a.subset);
  return a;
}

inline void write_split(std::ostream& out, const SplitAssignment& a) {
  csv::write_row(out, {"participant_id", "subset"});
  for (const auto& [id, s] : a.subset) csv::write_row(out, {id, std::string(to_string(s))});
}

inline SplitAssignment read_split(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  csv::require_header(table, {"participant_id", "subset"}, "split file");
  SplitAssignment a;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto s = row.size() == 2 ? parse_subset(row[1]) : std::nullopt;
    if (!s) {
      throw Error(Errc::UnparseableValue,
                  "split file line " + std::to_string(table.line_numbers[i]) + ": bad row");
    }
    if (!a.subset.emplace(row[0], *s).second) {
      throw Error(Errc::DuplicateParticipant, "split file lists '" + row[0] + "' twice");
    }
  }
  return a;
}

// Class imbalance ------------------------------------------------------------

/// Keeps every minority-class record and exactly `n_majority` majority-class
/// records drawn without replacement. Records whose label is missing are
/// dropped. `label` maps a record to std::optional<bool>. Output preserves
/// input order.
template <typename Record, typename LabelFn>
std::vector<Record> undersample_majority(std::span<const Record> records, LabelFn&& label,
                                         std::size_t n_majority, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::optional<bool> l = label(records[i]);
    if (!l) continue;
    (*l ? pos : neg).push_back(i);
  }
  std::vector<std::size_t>& majority = pos.size() > neg.size() ? pos : neg;
  std::vector<std::size_t>& minority = pos.size() > neg.size() ? neg : pos;
  if (n_majority > majority.size()) {
    throw Error(Errc::NotEnoughMajority,
                "requested " + std::to_string(n_majority) + " majority records, only " +
                    std::to_string(majority.size()) + " available");
  }
  Rng rng(seed);
  rng.shuffle(majority);
  majority.resize(n_majority);

  std::vector<std::size_t> keep = minority;
  keep.insert(keep.end(), majority.begin(), majority.end());
  std::sort(keep.begin(), keep.end());
  std::vector<Record> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(records[i]);
  return out;
}

using ClassWeights = std::map<int, double>;

/// weight_c = N / (K * n_c) for labels in [0, num_classes).
inline ClassWeights class_weights(std::span<const int> labels, int num_classes = 2) {
  if (num_classes < 1) throw Error(Errc::EmptyClass, "need at least one class");
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int l : labels) {
    if (l < 0 || l >= num_classes) {
      throw Error(Errc::UnparseableValue, "label " + std::to_string(l) + " out of range");
    }
    ++counts[static_cast<std::size_t>(l)];
  }
  ClassWeights w;
  const auto n = static_cast<double>(labels.size());
  for (int c = 0; c < num_classes; ++c) {
    const std::size_t nc = counts[static_cast<std::size_t>(c)];
    if (nc == 0) throw Error(Errc::EmptyClass, "class " + std::to_string(c) + " has no examples");
    w[c] = n / (static_cast<double>(num_classes) * static_cast<double>(nc));
  }
  return w;
}

}  // namespace fundus

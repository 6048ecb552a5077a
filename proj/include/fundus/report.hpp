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

// Metric reports with bootstrap confidence intervals, overall and per
// subgroup, on fused (per-person) and per-image prediction bases.

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fundus/bootstrap.hpp"
#include "fundus/csv.hpp"
#include "fundus/dataset.hpp"
#include "fundus/error.hpp"
#include "fundus/eye.hpp"
#include "fundus/fusion.hpp"
#include "fundus/metrics.hpp"
#include "fundus/task.hpp"

namespace fundus {

enum class Metric { MAE, R2, AUC_ROC, AUC_PR, Accuracy, Precision, Recall };

constexpr std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::MAE: return "MAE";
    case Metric::R2: return "R2";
    case Metric::AUC_ROC: return "AUC_ROC";
    case Metric::AUC_PR: return "AUC_PR";
    case Metric::Accuracy: return "accuracy";
    case Metric::Precision: return "precision";
    case Metric::Recall: return "recall";
  }
  return "?";
}

enum class SubgroupKind { Sex, BritishIrish, AgeBin, Eye };

constexpr std::string_view to_string(SubgroupKind k) {
  switch (k) {
    case SubgroupKind::Sex: return "sex";
    case SubgroupKind::BritishIrish: return "british_irish";
    case SubgroupKind::AgeBin: return "age_bin";
    case SubgroupKind::Eye: return "eye";
  }
  return "?";
}

inline std::optional<SubgroupKind> parse_subgroup_kind(std::string_view s) {
  for (auto k : {SubgroupKind::Sex, SubgroupKind::BritishIrish, SubgroupKind::AgeBin,
                 SubgroupKind::Eye}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

inline constexpr std::array<SubgroupKind, 4> kAllSubgroupKinds{
    SubgroupKind::Sex, SubgroupKind::BritishIrish, SubgroupKind::AgeBin, SubgroupKind::Eye};

struct SubgroupKey {
  SubgroupKind kind = SubgroupKind::Sex;
  std::string value;

  std::string describe() const { return std::string(to_string(kind)) + "=" + value; }
  friend bool operator==(const SubgroupKey&, const SubgroupKey&) = default;
};

/// The two age bins used for subgroup analysis: (39, 50] and (50, inf).
inline std::optional<std::string> age_bin(double age) {
  if (age > 39.0 && age <= 50.0) return "(39,50]";
  if (age > 50.0) return "(50,inf)";
  return std::nullopt;
}

/// Values of each grouping, in report order.
inline std::vector<std::string> subgroup_values(SubgroupKind kind) {
  switch (kind) {
    case SubgroupKind::Sex: return {"female", "male"};
    case SubgroupKind::BritishIrish: return {"yes", "no"};
    case SubgroupKind::AgeBin: return {"(39,50]", "(50,inf)"};
    case SubgroupKind::Eye: return {"L", "R"};
  }
  return {};
}

inline std::optional<std::string> subgroup_value_of(const ParticipantRecord& r, SubgroupKind kind) {
  switch (kind) {
    case SubgroupKind::Sex:
      if (!r.sex) return std::nullopt;
      return *r.sex == Sex::Male ? "male" : "female";
    case SubgroupKind::BritishIrish:
      if (!r.british_irish) return std::nullopt;
      return *r.british_irish ? "yes" : "no";
    case SubgroupKind::AgeBin:
      if (!r.age) return std::nullopt;
      return age_bin(*r.age);
    case SubgroupKind::Eye: return std::nullopt;
  }
  return std::nullopt;
}

/// How predictions were pooled: one fused value per person, or one value
/// per image.
enum class Basis { Fused, Image };

constexpr std::string_view to_string(Basis b) { return b == Basis::Fused ? "fused" : "image"; }

struct MetricReport {
  Task task = Task::Age;
  Metric metric = Metric::MAE;
  std::optional<double> estimate;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::size_t n = 0;
  std::optional<SubgroupKey> subgroup;
  std::optional<double> baseline;
  Basis basis = Basis::Fused;
  /// Error code when the metric could not be computed (or its CI could not).
  std::string note;
};

/// Metric reported for subgroup rows: AUC for classification, R^2 otherwise.
constexpr Metric primary_metric(Task t) { return is_classification(t) ? Metric::AUC_ROC : Metric::R2; }

inline std::vector<Metric> overall_metrics(Task t) {
  if (is_classification(t)) {
    return {Metric::AUC_ROC, Metric::AUC_PR, Metric::Accuracy, Metric::Precision, Metric::Recall};
  }
  return {Metric::MAE, Metric::R2};
}

/// Computes one metric; throws fundus::Error when it is undefined.
inline double compute_metric(Metric m, std::span<const double> pred, std::span<const double> truth) {
  auto labels = [&] {
    std::vector<int> out(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) out[i] = truth[i] >= 0.5 ? 1 : 0;
    return out;
  };
  switch (m) {
    case Metric::MAE: return mae(pred, truth);
    case Metric::R2: return r2(pred, truth);
    case Metric::AUC_ROC: return roc_auc(pred, labels());
    case Metric::AUC_PR: return pr_auc(pred, labels());
    case Metric::Accuracy: return threshold_metrics(pred, labels()).accuracy;
    case Metric::Precision: {
      const auto p = threshold_metrics(pred, labels()).precision;
      if (!p) throw Error(Errc::UndefinedPrecision, "no predicted positives");
      return *p;
    }
    case Metric::Recall: {
      const auto r = threshold_metrics(pred, labels()).recall;
      if (!r) throw Error(Errc::NoPositives, "no positive labels");
      return *r;
    }
  }
  return 0.0;
}

inline std::optional<double> metric_baseline(Metric m, std::span<const double> truth) {
  switch (m) {
    case Metric::MAE: return baseline_continuous(truth).mae_baseline;
    case Metric::R2: return baseline_continuous(truth).r2_baseline;
    case Metric::AUC_ROC: return kAucBaseline;
    case Metric::AUC_PR: {
      // No-skill average precision equals prevalence.
      double pos = 0.0;
      for (double t : truth) pos += t >= 0.5 ? 1.0 : 0.0;
      return pos / static_cast<double>(truth.size());
    }
    default: return std::nullopt;
  }
}

/// Metric with a percentile-bootstrap CI over the given (prediction, truth)
/// pairs. Failures are recorded in `note` instead of thrown.
inline MetricReport evaluate_metric(Task task, Metric metric, std::span<const double> pred,
                                    std::span<const double> truth, const BootstrapConfig& cfg) {
  MetricReport rep;
  rep.task = task;
  rep.metric = metric;
  rep.n = pred.size();
  if (pred.empty()) {
    rep.note = std::string(to_string(Errc::EmptySubgroup));
    return rep;
  }
  rep.baseline = metric_baseline(metric, truth);
  try {
    rep.estimate = compute_metric(metric, pred, truth);
  } catch (const Error& e) {
    rep.note = std::string(to_string(e.code()));
    return rep;
  }
  try {
    const auto res = bootstrap_ci(
        pred.size(),
        [&](std::span<const std::size_t> idx) {
          std::vector<double> p(idx.size()), t(idx.size());
          for (std::size_t i = 0; i < idx.size(); ++i) {
            p[i] = pred[idx[i]];
            t[i] = truth[idx[i]];
          }
          return compute_metric(metric, p, t);
        },
        cfg);
    rep.ci_low = res.ci_low;
    rep.ci_high = res.ci_high;
  } catch (const Error& e) {
    rep.note = std::string(to_string(e.code()));
  }
  return rep;
}

struct ReportOptions {
  /// Also emit overall rows on the per-image basis.
  bool include_image_basis = true;
};

namespace detail {

struct Unit {
  const ParticipantRecord* record;
  Eye eye;
  double prediction;
  double truth;
};

inline MetricReport unit_report(Task task, Metric metric, const std::vector<Unit>& units,
                                Basis basis, std::optional<SubgroupKey> subgroup,
                                const BootstrapConfig& cfg) {
  std::vector<double> pred, truth;
  pred.reserve(units.size());
  truth.reserve(units.size());
  for (const auto& u : units) {
    pred.push_back(u.prediction);
    truth.push_back(u.truth);
  }
  MetricReport rep = evaluate_metric(task, metric, pred, truth, cfg);
  rep.basis = basis;
  rep.subgroup = std::move(subgroup);
  return rep;
}

}  // namespace detail

/// Builds the report rows for each task: overall rows (fused basis, and
/// optionally image basis) with the full metric set, then one row per
/// subgroup value with the task's primary metric. Eye subgroups use the
/// unfused left/right predictions; all other subgroups use fused ones. Fused
/// values come from FUSED input rows when present for a task, otherwise from
/// fuse_all. Predictions whose participant is not in `records` raise
/// Errc::DanglingReference; units without ground truth are left out.
inline std::vector<MetricReport> subgroup_report(std::span<const PredictionRecord> predictions,
                                                 std::span<const ParticipantRecord> records,
                                                 std::span<const Task> tasks,
                                                 std::span<const SubgroupKind> groupings,
                                                 const BootstrapConfig& cfg,
                                                 const ReportOptions& opts = {}) {
  std::map<std::string, const ParticipantRecord*> by_id;
  for (const auto& r : records) by_id[r.participant_id] = &r;
  std::set<std::string> dangling;
  for (const auto& p : predictions) {
    if (!by_id.contains(p.participant_id)) dangling.insert(p.participant_id);
  }
  if (!dangling.empty()) {
    std::string msg = std::to_string(dangling.size()) + " predicted participant(s) not in manifest:";
    std::size_t shown = 0;
    for (const auto& id : dangling) {
      if (shown++ == 5) {
        msg += " ...";
        break;
      }
      msg += " " + id;
    }
    throw Error(Errc::DanglingReference, msg);
  }

  std::vector<MetricReport> out;
  for (Task task : tasks) {
    std::vector<PredictionRecord> per_eye, fused;
    for (const auto& p : predictions) {
      if (p.task != task) continue;
      (p.eye == Eye::Fused ? fused : per_eye).push_back(p);
    }
    if (fused.empty()) fused = fuse_all(per_eye).fused;

    auto to_units = [&](const std::vector<PredictionRecord>& preds) {
      std::vector<detail::Unit> units;
      for (const auto& p : preds) {
        const ParticipantRecord* r = by_id.at(p.participant_id);
        const auto truth = task_truth(*r, task);
        if (!truth) continue;
        units.push_back({r, p.eye, p.value, *truth});
      }
      return units;
    };
    const auto fused_units = to_units(fused);
    const auto image_units = to_units(per_eye);

    for (Metric m : overall_metrics(task)) {
      out.push_back(detail::unit_report(task, m, fused_units, Basis::Fused, std::nullopt, cfg));
    }
    if (opts.include_image_basis) {
      for (Metric m : overall_metrics(task)) {
        out.push_back(detail::unit_report(task, m, image_units, Basis::Image, std::nullopt, cfg));
      }
    }

    const Metric primary = primary_metric(task);
    for (SubgroupKind kind : groupings) {
      for (const auto& value : subgroup_values(kind)) {
        std::vector<detail::Unit> members;
        const bool eye_kind = kind == SubgroupKind::Eye;
        for (const auto& u : eye_kind ? image_units : fused_units) {
          const bool match = eye_kind ? std::string(to_string(u.eye)) == value
                                      : subgroup_value_of(*u.record, kind) == value;
          if (match) members.push_back(u);
        }
        out.push_back(detail::unit_report(task, primary, members,
                                          eye_kind ? Basis::Image : Basis::Fused,
                                          SubgroupKey{kind, value}, cfg));
      }
    }
  }
  return out;
}

// Output -----------------------------------------------------------------------

inline nlohmann::json to_json(const MetricReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    if (!v) return nullptr;
    return *v;
  };
  nlohmann::json j;
  j["task"] = std::string(to_string(r.task));
  j["metric"] = std::string(to_string(r.metric));
  j["estimate"] = opt(r.estimate);
  j["ci_low"] = opt(r.ci_low);
  j["ci_high"] = opt(r.ci_high);
  j["n"] = r.n;
  j["subgroup"] = r.subgroup ? nlohmann::json(r.subgroup->describe()) : nlohmann::json(nullptr);
  j["baseline"] = opt(r.baseline);
  j["basis"] = std::string(to_string(r.basis));
  j["note"] = r.note;
  return j;
}

/// One JSON object per line.
inline void write_report(std::ostream& out, std::span<const MetricReport> reports) {
  for (const auto& r : reports) out << to_json(r).dump() << '\n';
}

/// Aligned plain-text rendering for people.
inline void write_report_text(std::ostream& out, std::span<const MetricReport> reports) {
  auto num = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-10s %-6s %-24s %10s %22s %7s %9s  %s\n", "task",
                "metric", "basis", "subgroup", "estimate", "95% CI", "n", "baseline", "note");
  out << line;
  for (const auto& r : reports) {
    const std::string ci = "(" + num(r.ci_low) + ", " + num(r.ci_high) + ")";
    std::snprintf(line, sizeof line, "%-12s %-10s %-6s %-24s %10s %22s %7zu %9s  %s\n",
                  std::string(to_string(r.task)).c_str(), std::string(to_string(r.metric)).c_str(),
                  std::string(to_string(r.basis)).c_str(),
                  r.subgroup ? r.subgroup->describe().c_str() : "overall", num(r.estimate).c_str(),
                  ci.c_str(), r.n, num(r.baseline).c_str(), r.note.c_str());
    out << line;
  }
}

/// `truth,prediction` pairs for one task, for external plotting.
inline void write_scatter(std::ostream& out, std::span<const PredictionRecord> predictions,
                          std::span<const ParticipantRecord> records, Task task) {
  std::map<std::string, const ParticipantRecord*> by_id;
  for (const auto& r : records) by_id[r.participant_id] = &r;
  csv::write_row(out, {"truth", "prediction"});
  for (const auto& p : predictions) {
    if (p.task != task) continue;
    const auto it = by_id.find(p.participant_id);
    if (it == by_id.end()) continue;
    const auto truth = task_truth(*it->second, task);
    if (!truth) continue;
    csv::write_row(out, {csv::format_double(*truth), csv::format_double(p.value)});
  }
}

}  // namespace fundus

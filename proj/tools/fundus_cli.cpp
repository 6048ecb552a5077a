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

// Batch command-line front end:
//   fundus [global options] <preprocess|split|gate|fuse|evaluate|synth>
// Exit codes: 0 ok, 2 configuration error, 3 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fundus/fundus.hpp"
#include "fundus/image_io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void log(const std::string& msg) { std::cerr << "fundus: " << msg << '\n'; }

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw fundus::Error(fundus::Errc::Io, "cannot write " + path.string());
  return f;
}

fs::path image_root(const fundus::PipelineConfig& cfg) {
  if (!cfg.image_root.empty()) return cfg.image_root;
  return cfg.manifest.parent_path();
}

std::set<std::string> read_id_list(const fs::path& path) {
  const auto table = fundus::csv::read_file(path);
  fundus::csv::require_header(table, {"participant_id"}, "participant list");
  std::set<std::string> ids;
  for (const auto& row : table.rows) ids.insert(row.at(0));
  return ids;
}

void write_id_list(const fs::path& path, const std::vector<fundus::ParticipantRecord>& records) {
  auto f = open_output(path);
  fundus::csv::write_row(f, {"participant_id"});
  for (const auto& r : records) fundus::csv::write_row(f, {r.participant_id});
}

std::vector<fundus::ParticipantRecord> load_records(const fundus::PipelineConfig& cfg) {
  fundus::require_existing(cfg.manifest, "manifest");
  auto records = fundus::load_manifest(cfg.manifest, cfg.manifest_options);
  if (!cfg.kept.empty()) {
    fundus::require_existing(cfg.kept, "kept");
    const auto kept = read_id_list(cfg.kept);
    for (const auto& id : kept) {
      const bool known = std::any_of(records.begin(), records.end(),
                                     [&](const auto& r) { return r.participant_id == id; });
      if (!known) {
        throw fundus::Error(fundus::Errc::DanglingReference,
                            "kept list names unknown participant '" + id + "'");
      }
    }
    std::erase_if(records, [&](const auto& r) { return !kept.contains(r.participant_id); });
  }
  return records;
}

// preprocess ----------------------------------------------------------------

int cmd_preprocess(const fundus::PipelineConfig& cfg) {
  const auto records = load_records(cfg);
  const fs::path root = image_root(cfg);
  const bool png = cfg.output_format == "png";
  const fs::path out_dir = cfg.output / (png ? "png" : "tensors");
  fs::create_directories(out_dir);

  struct Job {
    std::string participant_id;
    fundus::Eye eye;
    std::string image;
  };
  std::vector<Job> jobs;
  for (const auto& r : records) {
    if (r.left_image) jobs.push_back({r.participant_id, fundus::Eye::Left, *r.left_image});
    if (r.right_image) jobs.push_back({r.participant_id, fundus::Eye::Right, *r.right_image});
  }

  std::vector<std::string> failure(jobs.size());
  fundus::parallel_for(jobs.size(), cfg.jobs, [&](std::size_t i) {
    const Job& job = jobs[i];
    const std::string stem = job.participant_id + "_" + std::string(fundus::to_string(job.eye));
    try {
      const auto img = fundus::read_image(root / job.image);
      if (png) {
        fundus::write_image(out_dir / (stem + ".png"), fundus::preprocess_bytes(img, cfg.preprocess));
      } else {
        fundus::write_tensor(out_dir / (stem + ".fpt"), fundus::preprocess(img, cfg.preprocess));
      }
    } catch (const fundus::Error& e) {
      failure[i] = e.what();
    }
  });

  auto f = open_output(cfg.output / "failures.csv");
  fundus::csv::write_row(f, {"participant_id", "eye", "image", "reason"});
  std::size_t failed = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (failure[i].empty()) continue;
    ++failed;
    fundus::csv::write_row(f, {jobs[i].participant_id, std::string(fundus::to_string(jobs[i].eye)),
                               jobs[i].image, failure[i]});
  }
  log("preprocess: " + std::to_string(jobs.size() - failed) + " written to " + out_dir.string() +
      ", " + std::to_string(failed) + " failure(s)");
  return kExitOk;
}

// split -------------------------------------------------------------------------

int cmd_split(const fundus::PipelineConfig& cfg) {
  const auto records = load_records(cfg);
  const auto split = fundus::grouped_split(records, cfg.ratios, cfg.seed);
  auto f = open_output(cfg.output / "split.csv");
  fundus::write_split(f, split);
  log("split: train " + std::to_string(split.count(fundus::Subset::Train)) + ", val " +
      std::to_string(split.count(fundus::Subset::Val)) + ", test " +
      std::to_string(split.count(fundus::Subset::Test)));
  return kExitOk;
}

// gate ----------------------------------------------------------------------------

int cmd_gate(const fundus::PipelineConfig& cfg) {
  const auto records = load_records(cfg);
  fundus::require_existing(cfg.scores, "scores");
  const auto scores = fundus::read_quality_scores(cfg.scores);
  const auto labels = fundus::apply_threshold(scores, cfg.quality_tau);

  const auto gaps = fundus::missing_labels(records, labels);
  if (!gaps.empty()) {
    log("gate: " + std::to_string(gaps.size()) + " image(s) have no quality score:");
    for (const auto& [id, eye] : gaps) std::cerr << "  " << id << "," << fundus::to_string(eye) << '\n';
    return kExitData;
  }
  const auto kept = fundus::filter_both_eyes_good(records, labels);
  {
    auto f = open_output(cfg.output / "gate_decisions.csv");
    fundus::write_gate_decisions(f, labels);
  }
  write_id_list(cfg.output / "kept_participants.csv", kept);

  const auto table = fundus::quality_table(records, labels);
  auto f = open_output(cfg.output / "quality_summary.txt");
  const auto pct = [](std::uint64_t good, std::uint64_t bad) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", good + bad ? 100.0 * double(good) / double(good + bad) : 0.0);
    return std::string(buf);
  };
  f << "eye,good,bad,good_rate\n";
  f << "L," << table.a << ',' << table.b << ',' << pct(table.a, table.b) << '\n';
  f << "R," << table.c << ',' << table.d << ',' << pct(table.c, table.d) << '\n';
  try {
    const auto chi = fundus::chi_square_independence(table);
    char buf[128];
    std::snprintf(buf, sizeof buf, "chi_square=%.6f\ndof=%d\np_value=%.6g\n", chi.statistic, chi.dof,
                  chi.p_value);
    f << buf;
  } catch (const fundus::Error& e) {
    f << "chi_square=undefined (" << fundus::to_string(e.code()) << ")\n";
  }
  f << "kept_participants=" << kept.size() << " of " << records.size() << '\n';
  log("gate: kept " + std::to_string(kept.size()) + " of " + std::to_string(records.size()) +
      " participants");
  return kExitOk;
}

// fuse ----------------------------------------------------------------------------

int cmd_fuse(const fundus::PipelineConfig& cfg) {
  fundus::require_existing(cfg.predictions, "predictions");
  const auto preds = fundus::read_predictions(cfg.predictions);
  const auto result = fundus::fuse_all(preds);
  auto f = open_output(cfg.output / "predictions_fused.csv");
  fundus::write_predictions(f, result.fused);
  log("fuse: " + std::to_string(result.fused.size()) + " fused record(s), " +
      std::to_string(result.skipped) + " single-eye group(s) skipped");
  return kExitOk;
}

// evaluate ------------------------------------------------------------------------

int cmd_evaluate(const fundus::PipelineConfig& cfg) {
  fundus::require_existing(cfg.manifest, "manifest");
  const auto all_records = fundus::load_manifest(cfg.manifest, cfg.manifest_options);
  fundus::require_existing(cfg.predictions, "predictions");
  auto preds = fundus::read_predictions(cfg.predictions);

  std::set<std::string> known;
  for (const auto& r : all_records) known.insert(r.participant_id);
  for (const auto& p : preds) {
    if (!known.contains(p.participant_id)) {
      throw fundus::Error(fundus::Errc::DanglingReference,
                          "prediction for unknown participant '" + p.participant_id + "'");
    }
  }

  const auto records = load_records(cfg);
  std::set<std::string> eligible;
  for (const auto& r : records) eligible.insert(r.participant_id);

  if (cfg.eval_split != "all") {
    if (!cfg.split_file.empty()) {
      fundus::require_existing(cfg.split_file, "split_file");
      const auto split = fundus::read_split(cfg.split_file);
      const auto wanted = *fundus::parse_subset(cfg.eval_split);
      for (const auto& id : eligible) {
        if (!split.subset.contains(id)) {
          throw fundus::Error(fundus::Errc::DanglingReference,
                              "participant '" + id + "' missing from split file");
        }
      }
      std::erase_if(preds, [&](const auto& p) { return split.subset.at(p.participant_id) != wanted; });
    } else {
      std::erase_if(preds, [&](const auto& p) { return p.split != cfg.eval_split; });
    }
  }
  std::erase_if(preds, [&](const auto& p) { return !eligible.contains(p.participant_id); });

  const auto reports = fundus::subgroup_report(preds, records, cfg.tasks, cfg.groupings, cfg.bootstrap);
  {
    auto f = open_output(cfg.output / "report.jsonl");
    fundus::write_report(f, reports);
  }
  {
    auto f = open_output(cfg.output / "report.txt");
    fundus::write_report_text(f, reports);
  }
  for (fundus::Task task : cfg.tasks) {
    std::vector<fundus::PredictionRecord> per_eye, fused;
    for (const auto& p : preds) {
      if (p.task == task) (p.eye == fundus::Eye::Fused ? fused : per_eye).push_back(p);
    }
    if (fused.empty()) fused = fundus::fuse_all(per_eye).fused;
    auto f = open_output(cfg.output / "scatter" / (std::string(fundus::to_string(task)) + ".csv"));
    fundus::write_scatter(f, fused, records, task);
  }
  log("evaluate: " + std::to_string(reports.size()) + " report row(s) written to " +
      (cfg.output / "report.jsonl").string());
  return kExitOk;
}

// synth -----------------------------------------------------------------------------

int cmd_synth(const fundus::PipelineConfig& cfg) {
  const auto records = fundus::synth_participants(cfg.synth_participants, cfg.seed);
  fs::create_directories(cfg.output / "images");

  std::vector<std::pair<std::string, std::size_t>> images;
  for (std::size_t i = 0; i < records.size(); ++i) {
    images.emplace_back(*records[i].left_image, 2 * i);
    images.emplace_back(*records[i].right_image, 2 * i + 1);
  }
  fundus::parallel_for(images.size(), cfg.jobs, [&](std::size_t k) {
    const auto& [ref, index] = images[k];
    const bool black = index % 2 == 0 && index / 2 < cfg.synth_black_images;
    const auto img = black
        ? fundus::ImageBuffer(cfg.synth_image_size, cfg.synth_image_size, 3, fundus::RangeTag::Byte255)
        : fundus::make_fundus_like(cfg.synth_image_size, fundus::derive_seed(cfg.seed, index));
    fundus::write_image(cfg.output / ref, img);
  });

  {
    auto f = open_output(cfg.output / "manifest.csv");
    fundus::write_manifest(f, records);
  }
  {
    const auto scores = fundus::synth_quality_scores(records, cfg.synth_left_good, cfg.synth_right_good,
                                                     fundus::derive_seed(cfg.seed, 1'000'001));
    auto f = open_output(cfg.output / "quality_scores.csv");
    fundus::write_quality_scores(f, scores);
  }
  {
    const auto split = fundus::grouped_split(records, cfg.ratios, cfg.seed);
    const auto preds = fundus::synth_predictions(
        records, cfg.tasks, cfg.synth_noise, fundus::derive_seed(cfg.seed, 1'000'002),
        [&](const std::string& id) { return std::string(fundus::to_string(split.subset.at(id))); });
    auto f = open_output(cfg.output / "predictions.csv");
    fundus::write_predictions(f, preds);
  }
  log("synth: " + std::to_string(records.size()) + " participants, " +
      std::to_string(images.size()) + " images under " + cfg.output.string());
  return kExitOk;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fundus risk-factor pipeline: preprocessing, gating, splitting, fusion, evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flag_values;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--set", sets, "Override any configuration key: --set key=value");
  for (const auto& key : fundus::config_keys()) {
    app.add_option(flag_name(key), flag_values[key], "Configuration key '" + key + "'");
  }

  std::string command;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"preprocess", "Crop, resize, enhance and normalize every manifest image"},
      {"split", "Write a person-grouped train/val/test assignment"},
      {"gate", "Apply the quality threshold, keep both-eyes-good participants, test L/R rates"},
      {"fuse", "Average left/right predictions per participant and task"},
      {"evaluate", "Metrics with bootstrap CIs, overall and per subgroup"},
      {"synth", "Generate a synthetic manifest, images, quality scores and predictions"}};
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->callback([&command, name = name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    fundus::PipelineConfig cfg;
    if (!config_path.empty()) fundus::apply_settings(cfg, fundus::load_key_values(config_path));
    fundus::KeyValues overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw fundus::Error(fundus::Errc::BadConfig, "--set needs key=value");
      overrides[fundus::trim(s.substr(0, eq))] = fundus::trim(s.substr(eq + 1));
    }
    for (const auto& key : fundus::config_keys()) {
      if (app.count(flag_name(key)) > 0) overrides[key] = flag_values[key];
    }
    fundus::apply_settings(cfg, overrides);

    if (command == "preprocess") return cmd_preprocess(cfg);
    if (command == "split") return cmd_split(cfg);
    if (command == "gate") return cmd_gate(cfg);
    if (command == "fuse") return cmd_fuse(cfg);
    if (command == "evaluate") return cmd_evaluate(cfg);
    if (command == "synth") return cmd_synth(cfg);
    return kExitConfig;
  } catch (const fundus::Error& e) {
    log(e.what());
    return e.code() == fundus::Errc::BadConfig ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    log(e.what());
    return kExitData;
  }
}

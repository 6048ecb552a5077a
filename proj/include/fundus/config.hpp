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

// Pipeline configuration: a flat key=value file ('#' starts a comment) whose
// keys can all be overridden individually.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fundus/bootstrap.hpp"
#include "fundus/csv.hpp"
#include "fundus/dataset.hpp"
#include "fundus/error.hpp"
#include "fundus/imaging.hpp"
#include "fundus/quality.hpp"
#include "fundus/report.hpp"
#include "fundus/task.hpp"

namespace fundus {

using KeyValues = std::map<std::string, std::string>;

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline KeyValues parse_key_values(std::istream& in, const std::string& source = "config") {
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::BadConfig, source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    kv[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

inline KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::BadConfig, "cannot open config file " + path.string());
  return parse_key_values(f, path.string());
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(sep, start);
    const std::string item = trim(s.substr(start, end == std::string_view::npos ? s.npos : end - start));
    if (!item.empty()) out.push_back(item);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

struct PipelineConfig {
  // paths
  std::filesystem::path manifest;
  std::filesystem::path image_root;
  std::filesystem::path output = "out";
  std::filesystem::path scores;
  std::filesystem::path predictions;
  std::filesystem::path kept;
  std::filesystem::path split_file;

  // imaging
  PreprocessConfig preprocess;
  std::string output_format = "tensor";

  // dataset / gate
  ManifestOptions manifest_options;
  double quality_tau = kDefaultQualityThreshold;
  SplitRatios ratios;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  // evaluation
  BootstrapConfig bootstrap;
  std::vector<Task> tasks{kRiskFactorTasks.begin(), kRiskFactorTasks.end()};
  std::vector<SubgroupKind> groupings{kAllSubgroupKinds.begin(), kAllSubgroupKinds.end()};
  std::string eval_split = "test";

  // synthetic data
  std::size_t synth_participants = 40;
  std::size_t synth_image_size = 256;
  std::size_t synth_black_images = 0;
  double synth_left_good = 0.9;
  double synth_right_good = 0.9;
  double synth_noise = 0.5;
};

/// Every recognised key.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "manifest",       "image_root",       "output",           "scores",
      "predictions",    "kept",             "split_file",       "mask_threshold",
      "target_size",    "enhance",          "alpha",            "beta",
      "gamma",          "sigma_fraction",   "output_format",    "british_irish_values",
      "quality_tau",    "split_ratios",     "seed",             "jobs",
      "bootstrap_replicates", "bootstrap_level", "tasks",       "groupings",
      "eval_split",     "synth_participants", "synth_image_size", "synth_black_images",
      "synth_left_good", "synth_right_good", "synth_noise"};
  return keys;
}

namespace detail {

inline double config_double(const std::string& key, const std::string& v) {
  const auto d = csv::parse_double(v);
  if (!d || !std::isfinite(*d)) throw Error(Errc::BadConfig, key + ": not a number: '" + v + "'");
  return *d;
}

inline std::uint64_t config_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw Error(Errc::BadConfig, key + ": not a non-negative integer: '" + v + "'");
  }
  return out;
}

inline bool config_bool(const std::string& key, const std::string& v) {
  const std::string s = to_lower(v);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw Error(Errc::BadConfig, key + ": not a boolean: '" + v + "'");
}

}  // namespace detail

/// Applies key=value settings on top of `cfg`. Unknown keys and malformed
/// values raise Errc::BadConfig.
inline void apply_settings(PipelineConfig& cfg, const KeyValues& kv) {
  using detail::config_bool;
  using detail::config_double;
  using detail::config_uint;
  for (const auto& [key, v] : kv) {
    if (key == "manifest") cfg.manifest = v;
    else if (key == "image_root") cfg.image_root = v;
    else if (key == "output") cfg.output = v;
    else if (key == "scores") cfg.scores = v;
    else if (key == "predictions") cfg.predictions = v;
    else if (key == "kept") cfg.kept = v;
    else if (key == "split_file") cfg.split_file = v;
    else if (key == "mask_threshold") {
      const auto t = config_uint(key, v);
      if (t > 255) throw Error(Errc::BadConfig, "mask_threshold must be a byte value");
      cfg.preprocess.mask_threshold = static_cast<int>(t);
    } else if (key == "target_size") {
      cfg.preprocess.target = config_uint(key, v);
      if (cfg.preprocess.target == 0) throw Error(Errc::BadConfig, "target_size must be positive");
    } else if (key == "enhance") cfg.preprocess.enhance_enabled = config_bool(key, v);
    else if (key == "alpha") cfg.preprocess.enhance.alpha = config_double(key, v);
    else if (key == "beta") cfg.preprocess.enhance.beta = config_double(key, v);
    else if (key == "gamma") cfg.preprocess.enhance.gamma = config_double(key, v);
    else if (key == "sigma_fraction") {
      cfg.preprocess.enhance.sigma_fraction = config_double(key, v);
      if (!(cfg.preprocess.enhance.sigma_fraction > 0)) {
        throw Error(Errc::BadConfig, "sigma_fraction must be positive");
      }
    } else if (key == "output_format") {
      if (v != "tensor" && v != "png") throw Error(Errc::BadConfig, "output_format must be tensor or png");
      cfg.output_format = v;
    } else if (key == "british_irish_values") {
      cfg.manifest_options.british_irish_values = split_list(v, '|');
    } else if (key == "quality_tau") {
      cfg.quality_tau = config_double(key, v);
      if (!(cfg.quality_tau > 0 && cfg.quality_tau < 1)) {
        throw Error(Errc::BadConfig, "quality_tau must lie in (0, 1)");
      }
    } else if (key == "split_ratios") {
      const auto parts = split_list(v);
      if (parts.size() != 3) throw Error(Errc::BadConfig, "split_ratios needs three values");
      cfg.ratios = {config_double(key, parts[0]), config_double(key, parts[1]),
                    config_double(key, parts[2])};
      try {
        validate_ratios(cfg.ratios);
      } catch (const Error& e) {
        throw Error(Errc::BadConfig, e.what());
      }
    } else if (key == "seed") {
      cfg.seed = config_uint(key, v);
      cfg.bootstrap.seed = cfg.seed;
    } else if (key == "jobs") {
      cfg.jobs = config_uint(key, v);
      if (cfg.jobs == 0) throw Error(Errc::BadConfig, "jobs must be at least 1");
      cfg.bootstrap.jobs = cfg.jobs;
    } else if (key == "bootstrap_replicates") {
      cfg.bootstrap.replicates = config_uint(key, v);
      if (cfg.bootstrap.replicates == 0) throw Error(Errc::BadConfig, "bootstrap_replicates must be >= 1");
    } else if (key == "bootstrap_level") {
      cfg.bootstrap.level = config_double(key, v);
      if (!(cfg.bootstrap.level > 0 && cfg.bootstrap.level < 1)) {
        throw Error(Errc::BadConfig, "bootstrap_level must lie in (0, 1)");
      }
    } else if (key == "tasks") {
      cfg.tasks.clear();
      for (const auto& t : split_list(v)) {
        const auto task = parse_task(t);
        if (!task) throw Error(Errc::BadConfig, "unknown task '" + t + "'");
        cfg.tasks.push_back(*task);
      }
    } else if (key == "groupings") {
      cfg.groupings.clear();
      for (const auto& g : split_list(v)) {
        const auto kind = parse_subgroup_kind(g);
        if (!kind) throw Error(Errc::BadConfig, "unknown grouping '" + g + "'");
        cfg.groupings.push_back(*kind);
      }
    } else if (key == "eval_split") {
      if (v != "all" && !parse_subset(v)) {
        throw Error(Errc::BadConfig, "eval_split must be train, val, test or all");
      }
      cfg.eval_split = v;
    } else if (key == "synth_participants") cfg.synth_participants = config_uint(key, v);
    else if (key == "synth_image_size") {
      cfg.synth_image_size = config_uint(key, v);
      if (cfg.synth_image_size < 16) throw Error(Errc::BadConfig, "synth_image_size must be >= 16");
    } else if (key == "synth_black_images") cfg.synth_black_images = config_uint(key, v);
    else if (key == "synth_left_good") cfg.synth_left_good = config_double(key, v);
    else if (key == "synth_right_good") cfg.synth_right_good = config_double(key, v);
    else if (key == "synth_noise") cfg.synth_noise = config_double(key, v);
    else throw Error(Errc::BadConfig, "unknown config key '" + key + "'");
  }
}

/// Fails with Errc::BadConfig unless `path` is set and exists.
inline void require_existing(const std::filesystem::path& path, std::string_view key) {
  if (path.empty()) throw Error(Errc::BadConfig, std::string(key) + " is not set");
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::BadConfig, std::string(key) + " does not exist: " + path.string());
  }
}

}  // namespace fundus

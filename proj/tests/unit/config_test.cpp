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

#include "fundus/config.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace fundus {
namespace {

TEST(KeyValueTest, ParsesCommentsAndWhitespace) {
  std::istringstream in("# comment\n seed = 7 \n\ntasks=age, sbp # trailing\n");
  const auto kv = parse_key_values(in);
  EXPECT_EQ(kv.at("seed"), "7");
  EXPECT_EQ(kv.at("tasks"), "age, sbp");
}

TEST(KeyValueTest, RejectsLineWithoutEquals) {
  std::istringstream in("seed 7\n");
  EXPECT_THROW(parse_key_values(in), Error);
}

TEST(ApplySettingsTest, OverridesDefaults) {
  PipelineConfig cfg;
  apply_settings(cfg, {{"seed", "11"},
                       {"jobs", "4"},
                       {"split_ratios", "0.7,0.15,0.15"},
                       {"tasks", "age,sex"},
                       {"groupings", "eye"},
                       {"enhance", "off"},
                       {"british_irish_values", "British|Irish|White Irish"}});
  EXPECT_EQ(cfg.seed, 11u);
  EXPECT_EQ(cfg.bootstrap.seed, 11u);
  EXPECT_EQ(cfg.bootstrap.jobs, 4u);
  EXPECT_DOUBLE_EQ(cfg.ratios.train, 0.7);
  EXPECT_EQ(cfg.tasks, (std::vector<Task>{Task::Age, Task::Sex}));
  EXPECT_EQ(cfg.groupings, std::vector<SubgroupKind>{SubgroupKind::Eye});
  EXPECT_FALSE(cfg.preprocess.enhance_enabled);
  EXPECT_EQ(cfg.manifest_options.british_irish_values.size(), 3u);
}

TEST(ApplySettingsTest, Defaults) {
  const PipelineConfig cfg;
  EXPECT_EQ(cfg.preprocess.target, 587u);
  EXPECT_EQ(cfg.bootstrap.replicates, 1000u);
  EXPECT_DOUBLE_EQ(cfg.bootstrap.level, 0.95);
  EXPECT_DOUBLE_EQ(cfg.quality_tau, 0.5);
  EXPECT_EQ(cfg.tasks.size(), 8u);
}

TEST(ApplySettingsTest, RejectsBadValues) {
  const std::vector<KeyValues> bad{{{"colour", "red"}},
                                   {{"seed", "-1"}},
                                   {{"jobs", "0"}},
                                   {{"quality_tau", "1.5"}},
                                   {{"split_ratios", "0.5,0.5"}},
                                   {{"split_ratios", "0.5,0.2,0.2"}},
                                   {{"tasks", "age,height"}},
                                   {{"eval_split", "holdout"}},
                                   {{"enhance", "maybe"}},
                                   {{"output_format", "jpeg"}}};
  for (const auto& kv : bad) {
    PipelineConfig cfg;
    try {
      apply_settings(cfg, kv);
      ADD_FAILURE() << kv.begin()->first << "=" << kv.begin()->second;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::BadConfig);
    }
  }
}

TEST(ApplySettingsTest, EveryKeyIsAccepted) {
  PipelineConfig cfg;
  for (const auto& key : config_keys()) {
    try {
      apply_settings(cfg, {{key, "\x01"}});
    } catch (const Error& e) {
      EXPECT_EQ(std::string(e.what()).find("unknown config key"), std::string::npos) << key;
    }
  }
}

}  // namespace
}  // namespace fundus

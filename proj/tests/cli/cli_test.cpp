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

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "fundus/fundus.hpp"
#include "fundus/image_io.hpp"
#include "support/cli_harness.hpp"

namespace fundus {
namespace {

using testing::count_lines;
using testing::q;
using testing::run_cli;
using testing::scratch_dir;
using testing::slurp;
namespace fs = std::filesystem;

// Manifest of n participants with one disk image per eye. The first
// `black` left images are all zero.
fs::path write_disk_cohort(const fs::path& dir, std::size_t n, std::size_t black = 0) {
  auto records = synth_participants(n, 1);
  fs::create_directories(dir / "images");
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& ref : {*records[i].left_image, *records[i].right_image}) {
      const bool dark = i < black && ref == *records[i].left_image;
      const auto img = dark ? ImageBuffer(90, 72, 3, RangeTag::Byte255)
                            : make_disk_image(90, 72, 45 + double(i % 3), 36, 30, 180);
      write_image(dir / ref, img);
    }
  }
  std::ofstream f(dir / "manifest.csv");
  write_manifest(f, records);
  return dir / "manifest.csv";
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

TEST(CliPreprocessTest, DisksBecomeTensors) {
  const auto dir = scratch_dir();
  const auto manifest = write_disk_cohort(dir, 5);
  const auto r = run_cli("preprocess --manifest " + q(manifest) + " --output " + q(dir / "out") +
                             " --target-size 64",
                         dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(std::distance(fs::directory_iterator(dir / "out/tensors"), fs::directory_iterator{}), 10);
  EXPECT_EQ(count_lines(dir / "out/failures.csv"), 1u);
  const auto t = read_tensor(dir / "out/tensors/P0001_L.fpt");
  EXPECT_EQ(t.width(), 64u);
  EXPECT_EQ(t.height(), 64u);
  EXPECT_EQ(t.channels(), 3u);
  EXPECT_TRUE(t.in_range());
}

TEST(CliPreprocessTest, BlackImageIsReportedNotFatal) {
  const auto dir = scratch_dir();
  const auto manifest = write_disk_cohort(dir, 5, 1);
  const auto r = run_cli("preprocess --manifest " + q(manifest) + " --output " + q(dir / "out") +
                             " --target-size 64",
                         dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(std::distance(fs::directory_iterator(dir / "out/tensors"), fs::directory_iterator{}), 9);
  const auto failures = csv::read_file(dir / "out/failures.csv");
  ASSERT_EQ(failures.rows.size(), 1u);
  EXPECT_EQ(failures.rows[0][0], "P0001");
  EXPECT_EQ(failures.rows[0][1], "L");
  EXPECT_NE(failures.rows[0][3].find("NoMaskFound"), std::string::npos);
}

TEST(CliPreprocessTest, RerunAndJobCountAreByteIdentical) {
  const auto dir = scratch_dir();
  const auto manifest = write_disk_cohort(dir, 4);
  const std::string base = "preprocess --manifest " + q(manifest) + " --target-size 48 ";
  ASSERT_EQ(run_cli(base + "--output " + q(dir / "a") + " --jobs 1", dir).exit_code, 0);
  ASSERT_EQ(run_cli(base + "--output " + q(dir / "b") + " --jobs 1", dir).exit_code, 0);
  ASSERT_EQ(run_cli(base + "--output " + q(dir / "c") + " --jobs 4", dir).exit_code, 0);
  const auto a = dir_contents(dir / "a/tensors");
  EXPECT_EQ(a.size(), 8u);
  EXPECT_EQ(a, dir_contents(dir / "b/tensors"));
  EXPECT_EQ(a, dir_contents(dir / "c/tensors"));
}

TEST(CliPreprocessTest, PngOutput) {
  const auto dir = scratch_dir();
  const auto manifest = write_disk_cohort(dir, 2);
  ASSERT_EQ(run_cli("preprocess --manifest " + q(manifest) + " --output " + q(dir / "out") +
                        " --target-size 40 --output-format png",
                    dir)
                .exit_code,
            0);
  const auto img = read_image(dir / "out/png/P0002_R.png");
  EXPECT_EQ(img.width(), 40u);
  EXPECT_EQ(img.height(), 40u);
}

// Gate inputs without images: the gate only reads the manifest and scores.
void write_gate_inputs(const fs::path& dir, const std::vector<ParticipantRecord>& recs,
                       const std::vector<QualityScore>& scores) {
  std::ofstream m(dir / "manifest.csv");
  write_manifest(m, recs);
  std::ofstream s(dir / "scores.csv");
  write_quality_scores(s, scores);
}

TEST(CliGateTest, AllGoodKeepsEveryone) {
  const auto dir = scratch_dir();
  const auto recs = synth_participants(12, 2);
  std::vector<QualityScore> scores;
  for (const auto& r : recs) {
    scores.push_back({r.participant_id, Eye::Left, 0.9});
    scores.push_back({r.participant_id, Eye::Right, 0.9});
  }
  write_gate_inputs(dir, recs, scores);
  const auto r = run_cli("gate --manifest " + q(dir / "manifest.csv") + " --scores " + q(dir / "scores.csv") +
                             " --output " + q(dir / "out"),
                         dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(count_lines(dir / "out/kept_participants.csv"), 13u);
  EXPECT_EQ(count_lines(dir / "out/gate_decisions.csv"), 25u);
  // Right-column marginal is zero, so the test statistic is undefined.
  EXPECT_NE(slurp(dir / "out/quality_summary.txt").find("chi_square=undefined"), std::string::npos);
}

TEST(CliGateTest, AlternatingScoresKeepNobody) {
  const auto dir = scratch_dir();
  const auto recs = synth_participants(12, 2);
  std::vector<QualityScore> scores;
  for (const auto& r : recs) {
    scores.push_back({r.participant_id, Eye::Left, 0.9});
    scores.push_back({r.participant_id, Eye::Right, 0.1});
  }
  write_gate_inputs(dir, recs, scores);
  ASSERT_EQ(run_cli("gate --manifest " + q(dir / "manifest.csv") + " --scores " + q(dir / "scores.csv") +
                        " --output " + q(dir / "out"),
                    dir)
                .exit_code,
            0);
  EXPECT_EQ(count_lines(dir / "out/kept_participants.csv"), 1u);
}

TEST(CliGateTest, MissingScoresListed) {
  const auto dir = scratch_dir();
  const auto recs = synth_participants(3, 2);
  std::vector<QualityScore> scores{{"P0001", Eye::Left, 0.9}, {"P0001", Eye::Right, 0.9}};
  write_gate_inputs(dir, recs, scores);
  const auto r = run_cli("gate --manifest " + q(dir / "manifest.csv") + " --scores " + q(dir / "scores.csv") +
                             " --output " + q(dir / "out"),
                         dir);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("P0002,L"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("P0003,R"), std::string::npos);
}

TEST(CliGateTest, CohortScaleQualityRates) {
  const auto dir = scratch_dir();
  const std::size_t n = 67120;
  auto recs = synth_participants(n, 5);
  const auto scores = synth_quality_scores(recs, 0.5362, 0.5837, 13);
  write_gate_inputs(dir, recs, scores);
  const auto r = run_cli("gate --manifest " + q(dir / "manifest.csv") + " --scores " + q(dir / "scores.csv") +
                             " --output " + q(dir / "out"),
                         dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;

  // Oracle: count both-good participants straight from the generated scores.
  std::map<std::string, int> good;
  for (const auto& s : scores) good[s.participant_id] += s.score >= 0.5;
  const auto expected = std::count_if(good.begin(), good.end(), [](const auto& kv) { return kv.second == 2; });
  const auto kept = count_lines(dir / "out/kept_participants.csv") - 1;
  EXPECT_EQ(static_cast<long>(kept), expected);
  // Independent eyes: kept fraction near the product of the rates. The
  // standard error at this size is about 0.0018.
  EXPECT_NEAR(double(kept) / n, 0.5362 * 0.5837, 0.01);

  const auto summary = slurp(dir / "out/quality_summary.txt");
  EXPECT_NE(summary.find("chi_square="), std::string::npos);
  EXPECT_NE(summary.find("dof=1"), std::string::npos);
  EXPECT_NE(summary.find("p_value="), std::string::npos);
}

TEST(CliSplitTest, GroupedAndDeterministic) {
  const auto dir = scratch_dir();
  const auto recs = synth_participants(50, 1);
  {
    std::ofstream m(dir / "manifest.csv");
    write_manifest(m, recs);
  }
  const std::string base = "split --manifest " + q(dir / "manifest.csv") + " --seed 9 --output ";
  ASSERT_EQ(run_cli(base + q(dir / "a"), dir).exit_code, 0);
  ASSERT_EQ(run_cli(base + q(dir / "b"), dir).exit_code, 0);
  EXPECT_EQ(slurp(dir / "a/split.csv"), slurp(dir / "b/split.csv"));
  const auto split = read_split(dir / "a/split.csv");
  EXPECT_EQ(split.count(Subset::Train), 30u);
  EXPECT_EQ(split.count(Subset::Val), 10u);
  EXPECT_EQ(split.count(Subset::Test), 10u);
}

TEST(CliConfigTest, FilePrecedenceAndExitCodes) {
  const auto dir = scratch_dir();
  const auto recs = synth_participants(20, 1);
  {
    std::ofstream m(dir / "manifest.csv");
    write_manifest(m, recs);
    std::ofstream c(dir / "run.cfg");
    c << "manifest=" << (dir / "manifest.csv").string() << "\nsplit_ratios=0.5,0.25,0.25\noutput="
      << (dir / "out").string() << "\n";
  }
  ASSERT_EQ(run_cli("split --config " + q(dir / "run.cfg"), dir).exit_code, 0);
  EXPECT_EQ(read_split(dir / "out/split.csv").count(Subset::Train), 10u);
  ASSERT_EQ(run_cli("split --config " + q(dir / "run.cfg") + " --set split_ratios=0.6,0.2,0.2", dir).exit_code, 0);
  EXPECT_EQ(read_split(dir / "out/split.csv").count(Subset::Train), 12u);

  EXPECT_EQ(run_cli("split --config " + q(dir / "run.cfg") + " --set colour=red", dir).exit_code, 2);
  EXPECT_EQ(run_cli("split --manifest " + q(dir / "nope.csv"), dir).exit_code, 2);
  EXPECT_EQ(run_cli("split --config " + q(dir / "run.cfg") + " --split-ratios 0.5,0.5,0.5", dir).exit_code, 2);
  EXPECT_EQ(run_cli("launch", dir).exit_code, 2);
}

TEST(CliFuseTest, FusesPairs) {
  const auto dir = scratch_dir();
  {
    std::ofstream p(dir / "preds.csv");
    p << "participant_id,eye,task,value,model_id,split\n"
         "A,L,age,55,m,test\nA,R,age,57,m,test\nB,L,sex,0.2,m,test\nB,R,sex,0.4,m,test\nC,L,age,60,m,test\n";
  }
  const auto r = run_cli("fuse --predictions " + q(dir / "preds.csv") + " --output " + q(dir / "out"), dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto fused = read_predictions(dir / "out/predictions_fused.csv");
  ASSERT_EQ(fused.size(), 2u);
  EXPECT_DOUBLE_EQ(fused[0].value, 56.0);
  EXPECT_DOUBLE_EQ(fused[1].value, 0.3);
  EXPECT_EQ(fused[1].eye, Eye::Fused);
}

class CliEvaluateTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch_dir();
    ASSERT_EQ(run_cli("synth --output " + q(dir_) + " --synth-participants 40 --synth-image-size 48 --seed 3",
                      dir_)
                  .exit_code,
              0);
  }
  std::string base() const {
    return "evaluate --manifest " + q(dir_ / "manifest.csv") + " --predictions " + q(dir_ / "predictions.csv");
  }
  fs::path dir_;
};

TEST_F(CliEvaluateTest, SingleReplicateGivesDegenerateInterval) {
  const auto r = run_cli(base() + " --eval-split all --bootstrap-replicates 1 --tasks age --groupings sex --output " +
                             q(dir_ / "out"),
                         dir_);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream lines(slurp(dir_ / "out/report.jsonl"));
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    ASSERT_FALSE(j.at("estimate").is_null()) << line;
    EXPECT_EQ(j.at("ci_low"), j.at("ci_high"));
    ++rows;
  }
  // MAE and R2 on both bases, then the two sex groups.
  EXPECT_EQ(rows, 6);
  EXPECT_EQ(count_lines(dir_ / "out/scatter/age.csv"), 41u);
}

TEST_F(CliEvaluateTest, ReportCoversEveryTaskAndSubgroup) {
  const auto r = run_cli(base() + " --eval-split all --bootstrap-replicates 20 --output " + q(dir_ / "out"), dir_);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::set<std::pair<std::string, std::string>> seen;
  std::istringstream lines(slurp(dir_ / "out/report.jsonl"));
  std::string line;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    seen.insert({j.at("task"), j.at("subgroup").is_null() ? "overall" : j.at("subgroup").get<std::string>()});
  }
  for (Task t : kRiskFactorTasks) {
    for (const std::string g : {"overall", "sex=female", "sex=male", "british_irish=yes", "british_irish=no",
                                "age_bin=(39,50]", "age_bin=(50,inf)", "eye=L", "eye=R"}) {
      EXPECT_TRUE(seen.contains({std::string(to_string(t)), g})) << to_string(t) << " " << g;
    }
  }
}

TEST_F(CliEvaluateTest, JobCountDoesNotChangeReport) {
  const std::string args = base() + " --bootstrap-replicates 50 --tasks sbp,smoking --output ";
  ASSERT_EQ(run_cli(args + q(dir_ / "a") + " --jobs 1", dir_).exit_code, 0);
  ASSERT_EQ(run_cli(args + q(dir_ / "b") + " --jobs 6", dir_).exit_code, 0);
  EXPECT_EQ(slurp(dir_ / "a/report.jsonl"), slurp(dir_ / "b/report.jsonl"));
}

TEST_F(CliEvaluateTest, DanglingPredictionExitsNonZero) {
  {
    std::ofstream p(dir_ / "predictions.csv", std::ios::app);
    p << "GHOST,L,age,50,m,test\n";
  }
  const auto r = run_cli(base() + " --output " + q(dir_ / "out"), dir_);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("GHOST"), std::string::npos);
}

TEST_F(CliEvaluateTest, EvaluationSplitRestrictsUnits) {
  const auto r = run_cli(base() + " --bootstrap-replicates 5 --tasks age --groupings eye --output " + q(dir_ / "out"),
                         dir_);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream lines(slurp(dir_ / "out/report.jsonl"));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(nlohmann::json::parse(line).at("n"), 8);
}

}  // namespace
}  // namespace fundus

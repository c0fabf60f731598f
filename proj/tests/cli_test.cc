// Copyright 2026 The ehrgan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ehrgan/table.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "ehrgan_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Result {
  int code = 0;
  std::string output;
};

Result run(const std::string& args) {
  const fs::path log = work_dir() / "last_output.txt";
  const std::string cmd =
      std::string(EHRGAN_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = ehrgan::read_file(log);
  return r;
}

std::string path(const std::string& rel) { return (work_dir() / rel).string(); }

std::string slurp(const std::string& rel) { return ehrgan::read_file(work_dir() / rel); }

nlohmann::json json_at(const std::string& rel) { return nlohmann::json::parse(slurp(rel)); }

// Shared fixture data: reference data and preprocessed output, built once.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ASSERT_EQ(run("make-reference-data --rows 3000 --seed 4 --out " + path("ref")).code, 0);
    ASSERT_EQ(run("preprocess --data " + path("ref/raw.csv") + " --schema " + path("ref/schema.json") +
                  " --seed 4 --out " + path("prep"))
                  .code,
              0);
  }
};

TEST_F(Cli, ReferenceDataIsDeterministic) {
  ASSERT_EQ(run("make-reference-data --rows 3000 --seed 4 --out " + path("ref2")).code, 0);
  EXPECT_EQ(slurp("ref/raw.csv"), slurp("ref2/raw.csv"));
  EXPECT_EQ(slurp("ref/schema.json"), slurp("ref2/schema.json"));
  EXPECT_TRUE(fs::exists(path("ref/ground_truth.json")));
  EXPECT_EQ(ehrgan::read_csv(path("ref/raw.csv")).size(), 3000u);
}

TEST_F(Cli, PreprocessWritesArtifacts) {
  for (const char* f : {"schema.json", "train.csv", "test.csv", "train.ehrm"}) {
    EXPECT_TRUE(fs::exists(path(std::string("prep/") + f))) << f;
  }
  EXPECT_EQ(slurp("prep/train.ehrm").substr(0, 4), "EHRM");
}

TEST_F(Cli, TrainGenerateEvaluate) {
  const std::string train_args =
      "train --data " + path("prep") + " --epochs 2 --reps 1 --batch-size 64 --seed 9 --out ";
  const Result t = run(train_args + path("run_a"));
  ASSERT_EQ(t.code, 0) << t.output;
  EXPECT_TRUE(fs::exists(path("run_a/run_config.json")));
  EXPECT_TRUE(fs::exists(path("run_a/rep_1/checkpoints/epoch_0001.ckpt")));
  EXPECT_TRUE(fs::exists(path("run_a/rep_1/checkpoints/epoch_0002.ckpt")));
  const std::string marker = slurp("run_a/rep_1/selected");
  EXPECT_EQ(marker.rfind("checkpoints/epoch_000", 0), 0u);
  const auto manifest = json_at("run_a/rep_1/manifest.json");
  EXPECT_TRUE(manifest.contains("selection_metric"));
  EXPECT_EQ(manifest.at("selected_checkpoint").get<std::string>() + "\n", marker);

  // Same inputs and seed: identical bytes apart from the timestamped log.
  ASSERT_EQ(run(train_args + path("run_b")).code, 0);
  for (const char* f : {"selected", "manifest.json", "checkpoints/epoch_0001.ckpt",
                        "checkpoints/epoch_0002.ckpt"}) {
    EXPECT_EQ(slurp(std::string("run_a/rep_1/") + f), slurp(std::string("run_b/rep_1/") + f)) << f;
  }

  const Result g = run("generate --data " + path("prep") + " --run " + path("run_a/rep_1") +
                       " --n 1000 --seed 3 --out " + path("gen.csv"));
  ASSERT_EQ(g.code, 0) << g.output;
  const ehrgan::Table syn = ehrgan::read_csv(path("gen.csv"));
  EXPECT_EQ(syn.size(), 1000u);
  const ehrgan::Table train = ehrgan::read_csv(path("prep/train.csv"));
  EXPECT_EQ(syn.columns, train.columns);

  const Result e = run("evaluate --data " + path("prep") + " --synthetic " + path("gen.csv") +
                       " --seed 1 --out " + path("eval"));
  ASSERT_EQ(e.code, 0) << e.output;
  for (const char* f : {"fidelity.json", "fidelity.txt", "utility.json", "utility.txt",
                        "subpopulations.json", "subpopulations.txt", "pca.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(path(std::string("eval/") + f))) << f;
  }
  EXPECT_EQ(slurp("eval/pca.csv").substr(0, 21), "dataset_label,pc1,pc2");
}

TEST_F(Cli, EvaluateRealAgainstRealIsZero) {
  const Result e = run("evaluate --data " + path("prep") + " --synthetic " + path("prep/train.csv") +
                       " --seed 2 --out " + path("eval_real"));
  ASSERT_EQ(e.code, 0) << e.output;
  const auto s = json_at("eval_real/fidelity.json").at("runs").at(0);
  EXPECT_EQ(s.at("bernoulli_divergence").get<double>(), 0.0);
  EXPECT_EQ(s.at("categorical_divergence").get<double>(), 0.0);
  EXPECT_EQ(s.at("frobenius_divergence").get<double>(), 0.0);
  EXPECT_EQ(s.at("category_sum_mean_deviation").get<double>(), 0.0);
}

TEST_F(Cli, DpTrainingWritesPrivacyLog) {
  const Result t = run("train --data " + path("prep") +
                       " --epochs 1 --reps 1 --batch-size 64 --epsilon 5 --seed 2 --out " + path("dp"));
  ASSERT_EQ(t.code, 0) << t.output;
  std::istringstream log(slurp("dp/rep_1/privacy_log.csv"));
  std::string header;
  std::getline(log, header);
  EXPECT_EQ(header, "step,epoch,sigma,sample_rate,clip_norm,epsilon");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(log, line)) ++rows;
  EXPECT_GT(rows, 0u);
  const auto manifest = json_at("dp/rep_1/manifest.json");
  EXPECT_TRUE(manifest.contains("dp"));
}

TEST_F(Cli, DpWithNonGpVariantNeedsOverride) {
  const Result t = run("train --data " + path("prep") +
                       " --variant vanilla --dp --epochs 1 --reps 1 --out " + path("dp_vanilla"));
  EXPECT_EQ(t.code, 2);
  EXPECT_NE(t.output.find("error:"), std::string::npos);
}

TEST_F(Cli, SweepWritesOneDirectoryPerEpsilon) {
  const Result s = run("sweep-epsilon --data " + path("prep") +
                       " --epsilon 5,inf --epochs 1 --reps 1 --batch-size 64 --seed 3 --out " +
                       path("sweep"));
  ASSERT_EQ(s.code, 0) << s.output;
  EXPECT_TRUE(fs::exists(path("sweep/eps_5/rep_1/selected")));
  EXPECT_TRUE(fs::exists(path("sweep/eps_inf/rep_1/selected")));
  EXPECT_FALSE(fs::exists(path("sweep/eps_inf/rep_1/privacy_log.csv")));
  const ehrgan::Table table = ehrgan::read_csv(path("sweep/sweep_table.csv"));
  EXPECT_EQ(table.size(), 2u);
  EXPECT_TRUE(fs::exists(path("sweep/sweep_summary.csv")));
  EXPECT_TRUE(fs::exists(path("sweep/bernoulli_scatter.csv")));
}

TEST_F(Cli, MissingArtifactsArePathErrors) {
  const Result r = run("train --data " + path("does_not_exist") + " --epochs 1 --out " + path("x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("error:"), std::string::npos);
  const Result g = run("generate --data " + path("prep") + " --checkpoint " + path("nope.ckpt") +
                       " --n 5 --out " + path("y.csv"));
  EXPECT_EQ(g.code, 2);
}

}  // namespace

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

// End-to-end driver: preprocessing, GAN training with per-epoch checkpoints
// and model selection, DP runs, generation, evaluation and the epsilon sweep.
// The CLI is a thin layer over these functions.

#ifndef EHRGAN_PIPELINE_H_
#define EHRGAN_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ehrgan/accountant.h"
#include "ehrgan/classifier.h"
#include "ehrgan/gan.h"
#include "ehrgan/metrics.h"
#include "ehrgan/report.h"
#include "ehrgan/schema.h"
#include "ehrgan/table.h"
#include "ehrgan/tensor.h"
#include "json.hpp"

namespace ehrgan {

namespace fs = std::filesystem;

// Output of preprocessing. `train` / `test` are feature tables (one column
// per schema feature); `train_encoded` is the GAN's training matrix.
struct PreparedData {
  Schema schema;
  Table train;
  Table test;
  Tensor train_encoded;
};

// filter -> split -> balance the training labels -> derive features ->
// fit mixtures on training data -> encode.
PreparedData prepare_data(const Table& raw, const Schema& schema_template, std::uint64_t seed,
                          bool balance = true);

// Directory layout: schema.json, train.csv, test.csv, train.ehrm.
void save_prepared(const PreparedData& data, const fs::path& dir);
PreparedData load_prepared(const fs::path& dir);

struct DpOptions {
  double epsilon = 1.0;
  double delta = 1e-5;
  double clip_norm = 1.0;
  // Calibrated so `epochs` epochs fit the budget when absent.
  std::optional<double> noise_multiplier;
};

struct RunConfig {
  std::string data_dir;  // preprocessed data
  Variant variant = Variant::kWganGp;
  // Merged over GanConfig::defaults(variant, width) as a JSON merge patch.
  nlohmann::json gan_overrides = nlohmann::json::object();
  std::optional<DpOptions> dp;
  bool allow_dp_any_variant = false;
  std::size_t epochs = 300;
  // DP runs continue until the budget is exhausted, up to this many epochs
  // (0 means 2 * epochs + 1).
  std::size_t max_dp_epochs = 0;
  std::uint64_t seed = 0;
  std::size_t reps = 3;
  std::size_t selection_rows = 10000;
  std::size_t synthetic_rows = 0;  // 0: as many as the training table
  bool keep_all_checkpoints = true;
  ClassifierConfig classifier;

  void validate() const;
  GanConfig gan_config(std::size_t output_width) const;
};

nlohmann::json to_json(const RunConfig& c);
// Missing keys keep their defaults.
RunConfig run_config_from_json(const nlohmann::json& j);
// FNV-1a 64 of the canonical config JSON, as 16 hex digits.
std::string config_hash(const RunConfig& c);

struct EpochRecord {
  std::uint64_t epoch = 0;
  std::size_t critic_steps = 0;
  std::size_t generator_steps = 0;
  double critic_loss = 0.0;
  double generator_loss = 0.0;
  std::optional<double> bernoulli;
  std::optional<double> categorical;
  double selection_metric = 0.0;
  std::optional<double> epsilon;  // DP runs
  bool eligible = true;           // epsilon within budget
  std::string checkpoint;         // file name, empty if not kept
};

struct TrainResult {
  GanState selected;
  std::uint64_t selected_epoch = 0;
  double selection_metric = 0.0;
  std::vector<EpochRecord> epochs;
  std::vector<PrivacyLogRow> privacy_log;
  std::optional<DpConfig> dp;  // with the noise multiplier actually used
  std::optional<AccountantState> accountant;
  bool budget_exhausted = false;
  nlohmann::json manifest;
};

// Trains one model. Selection picks the eligible epoch with the lowest
// (bernoulli + categorical) / 2 divergence between `selection_rows`
// generated rows and a seeded draw of as many training rows; ties keep the
// earlier epoch. With a non-empty `out_dir` it writes checkpoints/, the
// `selected` marker, privacy_log.csv, manifest.json and run.log.
TrainResult train_gan(const PreparedData& data, const RunConfig& config, std::uint64_t seed,
                      const fs::path& out_dir = {},
                      const std::function<void(const EpochRecord&)>& on_epoch = {});

// Seed of repetition k (1-based).
std::uint64_t repetition_seed(std::uint64_t seed, std::size_t k);

// Decoded synthetic feature table.
Table generate_table(const GanState& state, const Schema& schema, std::size_t n,
                     std::uint64_t seed);

// Checkpoint path recorded by a run directory's `selected` marker.
fs::path selected_checkpoint(const fs::path& run_dir);

struct UtilityRun {
  UtilityMetrics metrics;
  std::vector<SliceResult> slices;
  std::vector<double> scores;
  // The training table had a single class; scores are that class.
  bool degenerate = false;
};

// Trains the downstream classifier on `train` and scores the real test table.
UtilityRun evaluate_utility(const Table& train, const Table& test, const Schema& schema,
                            std::uint64_t seed, const ClassifierConfig& config,
                            std::span<const SliceSpec> slices);

// Default slices restricted to columns the test table has.
std::vector<SliceSpec> available_slices(const Table& test);

struct RepOutcome {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::uint64_t selected_epoch = 0;
  double selection_metric = 0.0;
  std::optional<double> final_epsilon;
  std::optional<double> sigma;
  FidelityReport fidelity;
  UtilityRun utility;
  DiscreteMarginals marginals;  // of the synthetic matrix
};

// Train, generate and evaluate repetition `rep` under `dir` (empty: nothing
// written).
RepOutcome run_repetition(const PreparedData& data, const RunConfig& config, std::size_t rep,
                          const fs::path& dir = {});

// Classifier trained on real training data, repetition `rep`.
UtilityRun baseline_repetition(const PreparedData& data, const RunConfig& config, std::size_t rep);

struct SweepRow {
  double epsilon = 0.0;  // +inf: no DP
  std::vector<RepOutcome> reps;
  UtilityReport summary;
};

// One DP experiment per epsilon (+inf runs without DP), `config.reps`
// repetitions each, under out_dir/eps_<value>/rep_<k>. The combined table
// (sweep_table.csv, sweep_summary.csv) and bernoulli_scatter.csv are
// rewritten after every epsilon so a failure keeps the finished rows.
std::vector<SweepRow> sweep_epsilon(const PreparedData& data, const RunConfig& config,
                                    std::span<const double> epsilons, const fs::path& out_dir = {},
                                    const std::function<void(const std::string&)>& log = {});

std::string epsilon_label(double epsilon);
std::string privacy_log_csv(std::span<const PrivacyLogRow> rows);
nlohmann::json to_json(const AccountantState& a, double delta);

}  // namespace ehrgan

#endif  // EHRGAN_PIPELINE_H_

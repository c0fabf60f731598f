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

// ehrgan command line: make-reference-data, preprocess, train, generate,
// evaluate, sweep-epsilon.

#include <malloc.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ehrgan/checkpoint.h"
#include "ehrgan/encoding.h"
#include "ehrgan/errors.h"
#include "ehrgan/pca.h"
#include "ehrgan/pipeline.h"
#include "ehrgan/reference_data.h"
#include "ehrgan/report.h"
#include "ehrgan/rng.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace ehrgan;

namespace {

nlohmann::json read_json(const fs::path& p) {
  if (!fs::exists(p)) throw PathError("no such file: " + p.string());
  try {
    return nlohmann::json::parse(read_file(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

void write_json(const fs::path& p, const nlohmann::json& j) { write_file(p, j.dump(2) + "\n"); }

void require_dir(const std::string& flag, const std::string& value) {
  if (value.empty()) throw ConfigError(flag + " is required");
}

// Flags shared by train and sweep-epsilon, applied over --config.
struct RunFlags {
  std::string config;
  std::string data;
  std::optional<std::uint64_t> seed;
  std::string variant;
  bool dp = false;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<double> noise_multiplier;
  std::optional<double> clip_norm;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> reps;
  bool allow_dp_any_variant = false;
  std::string keep_checkpoints;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "Run config JSON");
    app->add_option("--data", data, "Preprocessed data directory");
    app->add_option("--seed", seed, "Run seed (u64)");
    app->add_option("--variant", variant, "vanilla | wgan_clip | wgan_gp")
        ->check(CLI::IsMember({"vanilla", "wgan_clip", "wgan_gp"}));
    app->add_flag("--dp", dp, "Train the critic with DP-Adam");
    app->add_option("--epsilon", epsilon, "DP budget epsilon (implies --dp)");
    app->add_option("--delta", delta, "DP delta");
    app->add_option("--noise-multiplier", noise_multiplier, "DP noise multiplier (default: calibrated)");
    app->add_option("--clip-norm", clip_norm, "DP per-example clipping norm");
    app->add_option("--epochs", epochs, "Training epochs (DP: planned epochs)");
    app->add_option("--batch-size", batch_size, "Minibatch size");
    app->add_option("--reps", reps, "Repetitions");
    app->add_flag("--allow-dp-any-variant", allow_dp_any_variant, "Permit DP with vanilla / wgan_clip");
    app->add_option("--keep-checkpoints", keep_checkpoints, "all | best")
        ->check(CLI::IsMember({"all", "best"}));
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : run_config_from_json(read_json(config));
    if (!data.empty()) c.data_dir = data;
    if (seed) c.seed = *seed;
    if (!variant.empty()) c.variant = variant_from_string(variant);
    if (dp || epsilon || noise_multiplier) {
      if (!c.dp) c.dp = DpOptions{};
    }
    if (c.dp) {
      if (epsilon) c.dp->epsilon = *epsilon;
      if (delta) c.dp->delta = *delta;
      if (noise_multiplier) c.dp->noise_multiplier = *noise_multiplier;
      if (clip_norm) c.dp->clip_norm = *clip_norm;
    }
    if (epochs) c.epochs = *epochs;
    if (batch_size) c.gan_overrides["batch_size"] = *batch_size;
    if (reps) c.reps = *reps;
    if (allow_dp_any_variant) c.allow_dp_any_variant = true;
    if (!keep_checkpoints.empty()) c.keep_all_checkpoints = keep_checkpoints == "all";
    require_dir("--data", c.data_dir);
    c.validate();
    return c;
  }
};

int cmd_make_reference_data(const std::string& config, std::uint64_t seed, std::optional<std::size_t> rows,
                            const fs::path& out) {
  ReferenceDataSpec spec = config.empty() ? ReferenceDataSpec::defaults()
                                          : reference_spec_from_json(read_json(config));
  if (rows) spec.rows = *rows;
  const ReferenceData data = make_reference_data(spec, seed);
  fs::create_directories(out);
  write_csv(data.raw, out / "raw.csv");
  save_schema(data.schema, out / "schema.json");
  write_json(out / "ground_truth.json", data.ground_truth);
  std::cout << "wrote " << data.raw.size() << " rows to " << (out / "raw.csv").string() << "\n";
  return 0;
}

int cmd_preprocess(const fs::path& raw, const fs::path& schema, std::uint64_t seed, bool no_balance,
                   const fs::path& out) {
  if (!fs::exists(raw)) throw PathError("no such file: " + raw.string());
  const PreparedData d = prepare_data(read_csv(raw), load_schema(schema), seed, !no_balance);
  save_prepared(d, out);
  std::cout << "train rows " << d.train.size() << ", test rows " << d.test.size() << ", encoded width "
            << d.train_encoded.cols() << "\n";
  return 0;
}

int cmd_train(const RunConfig& c, const fs::path& out) {
  const PreparedData data = load_prepared(c.data_dir);
  fs::create_directories(out);
  write_json(out / "run_config.json", to_json(c));
  for (std::size_t k = 1; k <= c.reps; ++k) {
    const fs::path dir = out / ("rep_" + std::to_string(k));
    const TrainResult r = train_gan(data, c, repetition_seed(c.seed, k), dir, [&](const EpochRecord& e) {
      std::cout << "rep " << k << " epoch " << e.epoch << " critic " << e.critic_loss << " generator "
                << e.generator_loss << " metric " << e.selection_metric;
      if (e.epsilon) std::cout << " epsilon " << *e.epsilon;
      std::cout << std::endl;
    });
    std::cout << "rep " << k << " selected epoch " << r.selected_epoch << " (metric " << r.selection_metric
              << ")\n";
  }
  return 0;
}

// A run directory, or its rep_* children.
std::vector<fs::path> run_dirs(const fs::path& run) {
  if (fs::exists(run / "selected")) return {run};
  std::vector<fs::path> dirs;
  if (fs::is_directory(run)) {
    for (const auto& e : fs::directory_iterator(run)) {
      const std::string name = e.path().filename().string();
      if (e.is_directory() && name.rfind("rep_", 0) == 0 && fs::exists(e.path() / "selected")) {
        dirs.push_back(e.path());
      }
    }
  }
  std::sort(dirs.begin(), dirs.end(), [](const fs::path& a, const fs::path& b) {
    return std::stoul(a.filename().string().substr(4)) < std::stoul(b.filename().string().substr(4));
  });
  if (dirs.empty()) throw PathError("no trained run in " + run.string());
  return dirs;
}

int cmd_generate(const fs::path& data_dir, const std::string& checkpoint, const std::string& run,
                 std::size_t n, std::uint64_t seed, const fs::path& out) {
  if (checkpoint.empty() == run.empty()) throw ConfigError("give exactly one of --checkpoint and --run");
  const Schema schema = load_schema(data_dir / "schema.json");
  const fs::path ckpt = checkpoint.empty() ? selected_checkpoint(run_dirs(run).front()) : fs::path(checkpoint);
  if (!fs::exists(ckpt)) throw PathError("no such checkpoint: " + ckpt.string());
  const GanState state = load_checkpoint(ckpt.string());
  if (state.config.output_width != schema.encoded_width()) {
    throw SchemaError("checkpoint output width does not match the schema");
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_csv(generate_table(state, schema, n, seed), out);
  std::cout << "wrote " << n << " rows to " << out.string() << "\n";
  return 0;
}

int cmd_evaluate(const fs::path& data_dir, std::vector<std::string> synthetic, const std::string& run,
                 std::optional<std::size_t> n, std::uint64_t seed, const ClassifierConfig& classifier,
                 const fs::path& out) {
  const PreparedData data = load_prepared(data_dir);
  fs::create_directories(out);
  if (synthetic.empty() == run.empty()) throw ConfigError("give exactly one of --synthetic and --run");
  std::vector<Table> tables;
  if (!run.empty()) {
    const auto dirs = run_dirs(run);
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const GanState state = load_checkpoint(selected_checkpoint(dirs[k]).string());
      const std::size_t rows = n ? *n : data.train.size();
      tables.push_back(generate_table(state, data.schema, rows, derive_seed(repetition_seed(seed, k + 1), "synthetic")));
      const fs::path file = out / ("synthetic_rep_" + std::to_string(k + 1) + ".csv");
      write_csv(tables.back(), file);
      synthetic.push_back(file.string());
    }
  } else {
    for (const auto& s : synthetic) {
      if (!fs::exists(s)) throw PathError("no such file: " + s);
      tables.push_back(read_csv(s));
    }
  }

  const std::uint64_t encode_seed = derive_seed(seed, "evaluate-encode");
  const Tensor real = encode_table(data.train, data.schema, encode_seed);
  const auto slices = available_slices(data.test);
  std::vector<std::string> slice_names;
  for (const auto& s : slices) slice_names.push_back(s.name);

  nlohmann::json fidelity_runs = nlohmann::json::array();
  std::vector<double> bern, cat, frob;
  std::vector<UtilityMetrics> base_m, syn_m;
  std::vector<std::vector<UtilityMetrics>> base_s(slices.size()), syn_s(slices.size());
  nlohmann::json base_runs = nlohmann::json::array(), syn_runs = nlohmann::json::array();
  std::string fid_text;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    const std::uint64_t rep_seed = repetition_seed(seed, k + 1);
    const Tensor synth = encode_table(tables[k], data.schema, encode_seed);
    const FidelityReport f = evaluate_fidelity(real, synth, data.schema, derive_seed(seed, "fidelity"));
    fidelity_runs.push_back(to_json(f));
    if (f.bernoulli) bern.push_back(*f.bernoulli);
    if (f.categorical) cat.push_back(*f.categorical);
    frob.push_back(f.frobenius);
    fid_text += "synthetic " + std::to_string(k + 1) + " (" + synthetic[k] + ")\n" + fidelity_text(f) + "\n";

    const UtilityRun b = evaluate_utility(data.train, data.test, data.schema, derive_seed(rep_seed, "classifier"),
                                          classifier, slices);
    const UtilityRun s = evaluate_utility(tables[k], data.test, data.schema, derive_seed(rep_seed, "classifier"),
                                          classifier, slices);
    base_m.push_back(b.metrics);
    syn_m.push_back(s.metrics);
    base_runs.push_back(to_json(b.metrics));
    nlohmann::json sj = to_json(s.metrics);
    sj["degenerate"] = s.degenerate;
    syn_runs.push_back(sj);
    for (std::size_t i = 0; i < slices.size(); ++i) {
      if (b.slices[i].metrics) base_s[i].push_back(*b.slices[i].metrics);
      if (s.slices[i].metrics) syn_s[i].push_back(*s.slices[i].metrics);
    }
  }

  nlohmann::json fsum = {{"frobenius", to_json(confidence_interval(frob))}};
  if (!bern.empty()) fsum["bernoulli"] = to_json(confidence_interval(bern));
  if (!cat.empty()) fsum["categorical"] = to_json(confidence_interval(cat));
  write_json(out / "fidelity.json", {{"runs", fidelity_runs}, {"summary", fsum}});
  write_file(out / "fidelity.txt", fid_text);

  const UtilityReport base_r = summarize_utility(base_m);
  const UtilityReport syn_r = summarize_utility(syn_m);
  write_json(out / "utility.json", {{"baseline", {{"runs", base_runs}, {"summary", to_json(base_r)}}},
                                    {"synthetic", {{"runs", syn_runs}, {"summary", to_json(syn_r)}}}});
  write_file(out / "utility.txt", utility_text({{"real (baseline)", base_r}, {"synthetic", syn_r}}));

  std::vector<UtilityReport> base_sr, syn_sr;
  nlohmann::json sub = nlohmann::json::array();
  std::vector<std::string> present;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    if (base_s[i].empty() || syn_s[i].empty()) continue;
    present.push_back(slices[i].name);
    base_sr.push_back(summarize_utility(base_s[i]));
    syn_sr.push_back(summarize_utility(syn_s[i]));
    sub.push_back({{"slice", slices[i].name},
                   {"baseline", to_json(base_sr.back())},
                   {"synthetic", to_json(syn_sr.back())}});
  }
  write_json(out / "subpopulations.json", sub);
  write_file(out / "subpopulations.txt", slices_text({{"real (baseline)", base_sr}, {"synthetic", syn_sr}}, present));

  const FeatureMatrix real_x = featurize(data.train, data.schema);
  const FeatureMatrix syn_x = featurize(tables.front(), data.schema);
  write_file(out / "pca.csv", pca_csv(pca_project({{"real", real_x.x}, {"synthetic", syn_x.x}}, 2)));

  write_json(out / "manifest.json", {{"seed", seed},
                                     {"data_dir", data_dir.string()},
                                     {"synthetic", synthetic},
                                     {"reports",
                                      {{"fidelity", "fidelity.json"},
                                       {"utility", "utility.json"},
                                       {"subpopulations", "subpopulations.json"},
                                       {"pca", "pca.csv"}}}});
  std::cout << utility_text({{"real (baseline)", base_r}, {"synthetic", syn_r}});
  return 0;
}

std::vector<double> parse_epsilons(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) {
    if (s == "inf" || s == "infinity") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    double v;
    if (!parse_double(s, v)) throw ConfigError("bad epsilon '" + s + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_sweep(const RunConfig& c, const std::vector<double>& epsilons, const fs::path& out) {
  const PreparedData data = load_prepared(c.data_dir);
  fs::create_directories(out);
  write_json(out / "run_config.json", to_json(c));
  const auto rows = sweep_epsilon(data, c, epsilons, out, [](const std::string& msg) { std::cout << msg << std::endl; });
  std::vector<std::pair<std::string, UtilityReport>> table;
  for (const auto& r : rows) table.push_back({"epsilon " + epsilon_label(r.epsilon), r.summary});
  std::cout << utility_text(table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // Keep large tape buffers on the heap instead of fresh mmaps per step.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);

  CLI::App app{"Differentially private GAN synthesis of tabular health records"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out;
  std::string config;

  auto* mk = app.add_subcommand("make-reference-data", "Write a seeded reference dataset and its schema");
  std::optional<std::size_t> mk_rows;
  mk->add_option("--config", config, "Reference data settings JSON");
  mk->add_option("--seed", seed, "Seed");
  mk->add_option("--rows", mk_rows, "Row count");
  mk->add_option("--out", out, "Output directory")->required();

  auto* pre = app.add_subcommand("preprocess", "Filter, split, balance, fit mixtures and encode");
  std::string raw, schema;
  bool no_balance = false;
  pre->add_option("--data", raw, "Raw CSV")->required();
  pre->add_option("--schema", schema, "Schema template JSON")->required();
  pre->add_option("--seed", seed, "Seed");
  pre->add_flag("--no-balance", no_balance, "Keep the training labels unbalanced");
  pre->add_option("--out", out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train GAN repetitions with per-epoch checkpoints");
  RunFlags train_flags;
  train_flags.add_to(train);
  train->add_option("--out", out, "Output directory")->required();

  auto* gen = app.add_subcommand("generate", "Decode synthetic rows from a checkpoint");
  std::string data_dir, checkpoint, run;
  std::size_t gen_n = 1000;
  gen->add_option("--data", data_dir, "Preprocessed data directory")->required();
  gen->add_option("--checkpoint", checkpoint, "Checkpoint file");
  gen->add_option("--run", run, "Run directory (uses its selected checkpoint)");
  gen->add_option("--n", gen_n, "Rows to generate")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--out", out, "Output CSV")->required();

  auto* eval = app.add_subcommand("evaluate", "Fidelity, utility and sub-population reports");
  std::vector<std::string> synthetic;
  std::optional<std::size_t> eval_n;
  eval->add_option("--data", data_dir, "Preprocessed data directory")->required();
  eval->add_option("--synthetic", synthetic, "Synthetic feature CSV(s), one per repetition");
  eval->add_option("--run", run, "Trained run directory (rep_* children or a single run)");
  eval->add_option("--n", eval_n, "Rows to generate per repetition with --run");
  eval->add_option("--seed", seed, "Seed");
  eval->add_option("--config", config, "Run config JSON (classifier settings)");
  eval->add_option("--out", out, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep-epsilon", "DP utility across a list of epsilon values");
  RunFlags sweep_flags;
  std::vector<std::string> eps_list = {"1", "10", "20", "30"};
  sweep_flags.add_to(sweep);
  sweep->remove_option(sweep->get_option("--epsilon"));
  sweep->add_option("--epsilon", eps_list, "Epsilon values; 'inf' trains without DP")->delimiter(',');
  sweep->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (mk->parsed()) return cmd_make_reference_data(config, seed, mk_rows, out);
    if (pre->parsed()) return cmd_preprocess(raw, schema, seed, no_balance, out);
    if (train->parsed()) return cmd_train(train_flags.resolve(), out);
    if (gen->parsed()) return cmd_generate(data_dir, checkpoint, run, gen_n, seed, out);
    if (eval->parsed()) {
      const ClassifierConfig cc = config.empty() ? ClassifierConfig{} : run_config_from_json(read_json(config)).classifier;
      return cmd_evaluate(data_dir, synthetic, run, eval_n, seed, cc, out);
    }
    if (sweep->parsed()) {
      sweep_flags.dp = true;
      return cmd_sweep(sweep_flags.resolve(), parse_epsilons(eps_list), out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

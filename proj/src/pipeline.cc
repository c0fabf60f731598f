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

#include "ehrgan/pipeline.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "ehrgan/checkpoint.h"
#include "ehrgan/encoding.h"
#include "ehrgan/errors.h"
#include "ehrgan/matrix_io.h"
#include "ehrgan/preprocess.h"
#include "ehrgan/rng.h"

namespace ehrgan {
namespace {

constexpr char kSelectedMarker[] = "selected";

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

// Sidecar log; the only place timestamps are written.
class RunLog {
 public:
  explicit RunLog(const fs::path& path) {
    if (!path.empty()) out_.open(path, std::ios::app);
  }
  void line(const std::string& msg) {
    if (!out_) return;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%S", std::localtime(&now));
    out_ << stamp << ' ' << msg << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

nlohmann::json classifier_json(const ClassifierConfig& c) {
  return {{"hidden", c.hidden},
          {"learning_rate", c.optimizer.learning_rate},
          {"beta1", c.optimizer.beta1},
          {"beta2", c.optimizer.beta2},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"validation_fraction", c.validation_fraction}};
}

ClassifierConfig classifier_from_json(const nlohmann::json& j) {
  ClassifierConfig c;
  c.hidden = j.value("hidden", c.hidden);
  c.optimizer.learning_rate = j.value("learning_rate", c.optimizer.learning_rate);
  c.optimizer.beta1 = j.value("beta1", c.optimizer.beta1);
  c.optimizer.beta2 = j.value("beta2", c.optimizer.beta2);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
  if (c.batch_size < 1 || c.max_epochs < 1) throw ConfigError("classifier: batch_size and max_epochs must be positive");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0)) {
    throw ConfigError("classifier: validation_fraction must lie in (0, 1)");
  }
  c.optimizer.validate();
  return c;
}

nlohmann::json record_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"critic_steps", r.critic_steps},
          {"generator_steps", r.generator_steps},
          {"critic_loss", r.critic_loss},
          {"generator_loss", r.generator_loss},
          {"bernoulli_divergence", opt(r.bernoulli)},
          {"categorical_divergence", opt(r.categorical)},
          {"selection_metric", r.selection_metric},
          {"epsilon", opt(r.epsilon)},
          {"eligible", r.eligible},
          {"checkpoint", r.checkpoint}};
}

double selection_metric(const std::optional<double>& b, const std::optional<double>& c) {
  if (b && c) return (*b + *c) / 2.0;
  if (b) return *b;
  if (c) return *c;
  return 0.0;
}

std::string epoch_file(std::uint64_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%04llu.ckpt", static_cast<unsigned long long>(epoch));
  return buf;
}

std::string fmt(double v) { return std::isinf(v) ? (v > 0 ? "inf" : "-inf") : format_double(v); }
std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

void write_json(const fs::path& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

}  // namespace

PreparedData prepare_data(const Table& raw, const Schema& schema_template, std::uint64_t seed,
                          bool balance) {
  schema_template.validate();
  const Table filtered = apply_filters(raw, schema_template);
  auto [train_raw, test_raw] = split_train_test(filtered, schema_template);
  if (train_raw.size() == 0) throw ContractError("prepare_data: no training rows after filtering");
  if (test_raw.size() == 0) throw ContractError("prepare_data: no test rows after the split");
  if (balance) {
    train_raw = balance_by_label(train_raw, schema_template.label().source_column(), derive_seed(seed, "data"));
  }
  PreparedData out;
  out.train = derive_features(train_raw, schema_template);
  out.test = derive_features(test_raw, schema_template);
  out.schema = fit_schema(out.train, schema_template, derive_seed(seed, "gmm"));
  out.train_encoded = encode_table(out.train, out.schema, derive_seed(seed, "encode"));
  return out;
}

void save_prepared(const PreparedData& data, const fs::path& dir) {
  fs::create_directories(dir);
  save_schema(data.schema, dir / "schema.json");
  write_csv(data.train, dir / "train.csv");
  write_csv(data.test, dir / "test.csv");
  write_matrix((dir / "train.ehrm").string(), data.train_encoded);
}

PreparedData load_prepared(const fs::path& dir) {
  for (const char* f : {"schema.json", "train.csv", "test.csv", "train.ehrm"}) {
    if (!fs::exists(dir / f)) throw PathError("missing preprocessed artifact: " + (dir / f).string());
  }
  PreparedData d;
  d.schema = load_schema(dir / "schema.json");
  if (!d.schema.fitted()) throw SchemaError("schema in " + dir.string() + " is not fitted");
  d.train = read_csv(dir / "train.csv");
  d.test = read_csv(dir / "test.csv");
  d.train_encoded = read_matrix((dir / "train.ehrm").string());
  if (d.train_encoded.rows() != d.train.size() || d.train_encoded.cols() != d.schema.encoded_width()) {
    throw FormatError("train.ehrm does not match train.csv and the schema");
  }
  return d;
}

void RunConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (reps < 1) throw ConfigError("reps must be at least 1");
  if (selection_rows < 1) throw ConfigError("selection_rows must be at least 1");
  if (dp) {
    if (!(dp->epsilon > 0.0) || !std::isfinite(dp->epsilon)) throw ConfigError("DP epsilon must be positive and finite");
    if (!(dp->delta > 0.0 && dp->delta < 1.0)) throw ConfigError("DP delta must lie in (0, 1)");
    if (!(dp->clip_norm > 0.0) || !std::isfinite(dp->clip_norm)) throw ConfigError("DP clip norm must be positive and finite");
    if (dp->noise_multiplier && !(*dp->noise_multiplier > 0.0)) {
      throw ConfigError("DP noise multiplier must be positive");
    }
    if (variant != Variant::kWganGp && !allow_dp_any_variant) {
      throw ConfigError("DP training is only enabled for wgan_gp (set allow_dp_any_variant to override)");
    }
  }
}

GanConfig RunConfig::gan_config(std::size_t output_width) const {
  nlohmann::json j = to_json(GanConfig::defaults(variant, output_width));
  j.merge_patch(gan_overrides);
  j["output_width"] = output_width;
  j["variant"] = to_string(variant);
  return gan_config_from_json(j);
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json dp = nullptr;
  if (c.dp) {
    dp = {{"epsilon", c.dp->epsilon},
          {"delta", c.dp->delta},
          {"clip_norm", c.dp->clip_norm},
          {"noise_multiplier", opt(c.dp->noise_multiplier)}};
  }
  return {{"data_dir", c.data_dir},
          {"variant", to_string(c.variant)},
          {"gan", c.gan_overrides},
          {"dp", dp},
          {"allow_dp_any_variant", c.allow_dp_any_variant},
          {"epochs", c.epochs},
          {"max_dp_epochs", c.max_dp_epochs},
          {"seed", c.seed},
          {"reps", c.reps},
          {"selection_rows", c.selection_rows},
          {"synthetic_rows", c.synthetic_rows},
          {"keep_all_checkpoints", c.keep_all_checkpoints},
          {"classifier", classifier_json(c.classifier)}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    RunConfig c;
    c.data_dir = j.value("data_dir", c.data_dir);
    if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
    if (j.contains("gan")) {
      if (!j.at("gan").is_object()) throw ConfigError("'gan' must be an object");
      c.gan_overrides = j.at("gan");
    }
    if (j.contains("dp") && !j.at("dp").is_null()) {
      const auto& d = j.at("dp");
      DpOptions o;
      o.epsilon = d.value("epsilon", o.epsilon);
      o.delta = d.value("delta", o.delta);
      o.clip_norm = d.value("clip_norm", o.clip_norm);
      if (d.contains("noise_multiplier") && !d.at("noise_multiplier").is_null()) {
        o.noise_multiplier = d.at("noise_multiplier").get<double>();
      }
      c.dp = o;
    }
    c.allow_dp_any_variant = j.value("allow_dp_any_variant", c.allow_dp_any_variant);
    c.epochs = j.value("epochs", c.epochs);
    c.max_dp_epochs = j.value("max_dp_epochs", c.max_dp_epochs);
    c.seed = j.value("seed", c.seed);
    c.reps = j.value("reps", c.reps);
    c.selection_rows = j.value("selection_rows", c.selection_rows);
    c.synthetic_rows = j.value("synthetic_rows", c.synthetic_rows);
    c.keep_all_checkpoints = j.value("keep_all_checkpoints", c.keep_all_checkpoints);
    if (j.contains("classifier")) c.classifier = classifier_from_json(j.at("classifier"));
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
  return buf;
}

std::string epsilon_label(double epsilon) { return fmt(epsilon); }

std::string privacy_log_csv(std::span<const PrivacyLogRow> rows) {
  std::string s = "step,epoch,sigma,sample_rate,clip_norm,epsilon\n";
  for (const auto& r : rows) {
    s += std::to_string(r.step) + "," + std::to_string(r.epoch) + "," + fmt(r.sigma) + "," +
         fmt(r.sample_rate) + "," + fmt(r.clip_norm) + "," + fmt(r.epsilon) + "\n";
  }
  return s;
}

nlohmann::json to_json(const AccountantState& a, double delta) {
  nlohmann::json j = {{"steps", a.steps()},
                      {"orders", std::vector<double>(a.orders().begin(), a.orders().end())},
                      {"rdp", std::vector<double>(a.rdp().begin(), a.rdp().end())},
                      {"delta", delta}};
  if (a.steps() > 0) {
    j["epsilon"] = a.epsilon(delta);
    j["optimal_order"] = a.optimal_order(delta);
  } else {
    j["epsilon"] = 0.0;
  }
  return j;
}

std::uint64_t repetition_seed(std::uint64_t seed, std::size_t k) { return derive_seed(seed, k); }

TrainResult train_gan(const PreparedData& data, const RunConfig& config, std::uint64_t seed,
                      const fs::path& out_dir,
                      const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  const Tensor& x = data.train_encoded;
  if (x.rows() == 0) throw ContractError("train_gan: empty training matrix");
  const GanConfig gan = config.gan_config(x.cols());
  const bool write = !out_dir.empty();
  const fs::path ckpt_dir = out_dir / "checkpoints";
  if (write) {
    fs::create_directories(ckpt_dir);
    for (const auto& e : fs::directory_iterator(ckpt_dir)) {
      if (e.path().extension() == ".ckpt") fs::remove(e.path());
    }
    fs::remove(out_dir / kSelectedMarker);
  }
  RunLog log(write ? out_dir / "run.log" : fs::path());
  log.line("train start variant=" + to_string(gan.variant) + " seed=" + std::to_string(seed) +
           " rows=" + std::to_string(x.rows()) + " width=" + std::to_string(x.cols()) +
           " config_hash=" + config_hash(config));

  GanState state = init_gan(gan, seed);
  const Tensor validation = sample_rows(x, config.selection_rows, derive_seed(seed, "selection-real"));
  const std::uint64_t selection_noise = derive_seed(seed, "selection-noise");

  const std::size_t batch = std::min(gan.batch_size, x.rows());
  const std::size_t batches = x.rows() / batch;
  const double sample_rate = static_cast<double>(batch) / static_cast<double>(x.rows());

  TrainResult result;
  std::optional<DpTraining> dp;
  std::uint64_t planned_steps = 0;
  if (config.dp) {
    planned_steps = static_cast<std::uint64_t>(config.epochs) * batches;
    const double sigma = config.dp->noise_multiplier
                             ? *config.dp->noise_multiplier
                             : calibrate_noise(config.dp->epsilon, config.dp->delta, sample_rate, planned_steps);
    dp.emplace();
    dp->config = {config.dp->clip_norm, sigma, config.dp->epsilon, config.dp->delta};
    dp->config.validate();
    dp->on_step = [&result](const PrivacyLogRow& row) { result.privacy_log.push_back(row); };
    result.dp = dp->config;
    log.line("dp sigma=" + fmt(sigma) + " q=" + fmt(sample_rate) + " planned_steps=" +
             std::to_string(planned_steps));
  }
  const std::size_t max_epochs =
      dp ? (config.max_dp_epochs ? config.max_dp_epochs : 2 * config.epochs + 1) : config.epochs;

  auto accountant_dump = [&] {
    return to_json(dp->accountant, dp->config.delta).dump();
  };
  auto flush_privacy_log = [&] {
    if (write && dp) write_file(out_dir / "privacy_log.csv", privacy_log_csv(result.privacy_log));
  };

  bool have_best = false;
  std::string best_file;
  for (std::size_t e = 1; e <= max_epochs; ++e) {
    const EpochSummary summary = train_epoch(state, x, dp ? &*dp : nullptr);
    if (dp && dp->exhausted && e == 1 && summary.critic_steps < batches) {
      flush_privacy_log();
      log.line("budget exhausted during the first epoch");
      throw RunError("privacy budget exhausted before the first epoch completed; accountant: " +
                     accountant_dump());
    }
    EpochRecord rec;
    rec.epoch = summary.epoch;
    rec.critic_steps = summary.critic_steps;
    rec.generator_steps = summary.generator_steps;
    rec.critic_loss = summary.critic_losses.empty() ? 0.0 : summary.mean_critic_loss();
    rec.generator_loss = summary.generator_losses.empty() ? 0.0 : summary.mean_generator_loss();
    const Tensor synth = generate(state, config.selection_rows, selection_noise);
    rec.bernoulli = bernoulli_divergence(validation, synth, data.schema);
    rec.categorical = categorical_divergence(validation, synth, data.schema);
    rec.selection_metric = selection_metric(rec.bernoulli, rec.categorical);
    if (dp) {
      rec.epsilon = dp->config.noise_multiplier > 0.0 ? dp->accountant.epsilon(dp->config.delta)
                                                       : std::numeric_limits<double>::infinity();
      rec.eligible = *rec.epsilon <= dp->config.target_epsilon;
    }
    const bool improves = rec.eligible && (!have_best || rec.selection_metric < result.selection_metric);
    if (write && (config.keep_all_checkpoints || improves)) {
      rec.checkpoint = epoch_file(rec.epoch);
      save_checkpoint((ckpt_dir / rec.checkpoint).string(), state);
    }
    if (improves) {
      if (write && !config.keep_all_checkpoints && have_best) fs::remove(ckpt_dir / best_file);
      have_best = true;
      best_file = rec.checkpoint;
      result.selected = state;
      result.selected_epoch = rec.epoch;
      result.selection_metric = rec.selection_metric;
    }
    log.line("epoch " + std::to_string(rec.epoch) + " critic_loss=" + fmt(rec.critic_loss) +
             " generator_loss=" + fmt(rec.generator_loss) + " metric=" + fmt(rec.selection_metric) +
             (rec.epsilon ? " epsilon=" + fmt(*rec.epsilon) : std::string()));
    result.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    flush_privacy_log();
    if (dp && dp->exhausted) {
      result.budget_exhausted = true;
      log.line("privacy budget exhausted after step " + std::to_string(state.critic_updates));
      break;
    }
  }
  if (!have_best) {
    throw RunError("no epoch finished within the privacy budget; accountant: " + accountant_dump());
  }
  if (dp) result.accountant = dp->accountant;

  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& r : result.epochs) epochs.push_back(record_json(r));
  nlohmann::json m = {{"config", to_json(config)},
                      {"config_hash", config_hash(config)},
                      {"seed", seed},
                      {"gan_config", to_json(gan)},
                      {"training_rows", x.rows()},
                      {"selected_checkpoint", write ? "checkpoints/" + best_file : std::string()},
                      {"selected_epoch", result.selected_epoch},
                      {"selection_metric", result.selection_metric},
                      {"selection", {{"metric", "(bernoulli_divergence + categorical_divergence) / 2"},
                                     {"rows", config.selection_rows}}},
                      {"epochs", epochs},
                      {"dp", nullptr},
                      {"reports", nlohmann::json::object()}};
  if (dp) {
    m["dp"] = {{"clip_norm", dp->config.clip_norm},
               {"noise_multiplier", dp->config.noise_multiplier},
               {"noise_calibrated", !config.dp->noise_multiplier.has_value()},
               {"target_epsilon", dp->config.target_epsilon},
               {"delta", dp->config.delta},
               {"sample_rate", sample_rate},
               {"planned_steps", planned_steps},
               {"budget_exhausted", result.budget_exhausted},
               {"accountant", to_json(dp->accountant, dp->config.delta)},
               {"privacy_log", "privacy_log.csv"}};
  }
  result.manifest = m;
  if (write) {
    write_file(out_dir / kSelectedMarker, "checkpoints/" + best_file + "\n");
    write_json(out_dir / "manifest.json", m);
  }
  log.line("train done selected_epoch=" + std::to_string(result.selected_epoch));
  return result;
}

Table generate_table(const GanState& state, const Schema& schema, std::size_t n, std::uint64_t seed) {
  return decode_matrix(generate(state, n, seed), schema);
}

fs::path selected_checkpoint(const fs::path& run_dir) {
  const fs::path marker = run_dir / kSelectedMarker;
  if (!fs::exists(marker)) throw PathError("no selected checkpoint marker in " + run_dir.string());
  std::string name = read_file(marker);
  while (!name.empty() && (name.back() == '\n' || name.back() == '\r')) name.pop_back();
  const fs::path p = run_dir / name;
  if (!fs::exists(p)) throw PathError("selected checkpoint missing: " + p.string());
  return p;
}

std::vector<SliceSpec> available_slices(const Table& test) {
  std::vector<SliceSpec> out;
  for (auto& s : default_slices()) {
    bool ok = true;
    for (const auto& p : s.predicates) ok = ok && test.find_column(p.column).has_value();
    if (ok) out.push_back(std::move(s));
  }
  return out;
}

UtilityRun evaluate_utility(const Table& train, const Table& test, const Schema& schema,
                            std::uint64_t seed, const ClassifierConfig& config,
                            std::span<const SliceSpec> slices) {
  const FeatureMatrix tr = featurize(train, schema);
  const FeatureMatrix te = featurize(test, schema);
  UtilityRun out;
  const auto pos = std::count(tr.labels.begin(), tr.labels.end(), 1);
  if (pos == 0 || pos == static_cast<long>(tr.labels.size())) {
    out.degenerate = true;
    out.scores.assign(te.labels.size(), pos == 0 ? 0.0 : 1.0);
  } else {
    out.scores = train_classifier(tr.x, tr.labels, seed, config).predict(te.x);
  }
  out.metrics = utility_metrics(out.scores, te.labels);
  out.slices = slice_metrics(out.scores, te.labels, test, slices);
  return out;
}

namespace {

nlohmann::json utility_json(const UtilityRun& u) {
  nlohmann::json slices = nlohmann::json::array();
  for (const auto& s : u.slices) slices.push_back(to_json(s));
  return {{"metrics", to_json(u.metrics)}, {"degenerate", u.degenerate}, {"slices", slices}};
}

}  // namespace

RepOutcome run_repetition(const PreparedData& data, const RunConfig& config, std::size_t rep,
                          const fs::path& dir) {
  RepOutcome out;
  out.rep = rep;
  out.seed = repetition_seed(config.seed, rep);
  TrainResult tr = train_gan(data, config, out.seed, dir);
  out.selected_epoch = tr.selected_epoch;
  out.selection_metric = tr.selection_metric;
  if (tr.dp) out.sigma = tr.dp->noise_multiplier;
  if (tr.accountant) out.final_epsilon = tr.accountant->epsilon(tr.dp->delta);

  const std::size_t n = config.synthetic_rows ? config.synthetic_rows : data.train.size();
  const Tensor synth = generate(tr.selected, n, derive_seed(out.seed, "synthetic"));
  const Table synth_table = decode_matrix(synth, data.schema);
  out.fidelity = evaluate_fidelity(data.train_encoded, synth, data.schema, derive_seed(out.seed, "fidelity"));
  const auto slices = available_slices(data.test);
  out.utility = evaluate_utility(synth_table, data.test, data.schema, derive_seed(out.seed, "classifier"),
                                 config.classifier, slices);
  out.marginals = discrete_marginals(synth, data.schema);
  if (!dir.empty()) {
    write_csv(synth_table, dir / "synthetic.csv");
    write_json(dir / "evaluation.json",
               {{"fidelity", to_json(out.fidelity)}, {"utility", utility_json(out.utility)}});
    tr.manifest["reports"] = {{"synthetic", "synthetic.csv"}, {"evaluation", "evaluation.json"}};
    tr.manifest["repetition"] = {{"index", rep},
                                 {"policy", "each repetition retrains from its own seed derived from the run seed"}};
    write_json(dir / "manifest.json", tr.manifest);
  }
  return out;
}

UtilityRun baseline_repetition(const PreparedData& data, const RunConfig& config, std::size_t rep) {
  const auto slices = available_slices(data.test);
  return evaluate_utility(data.train, data.test, data.schema,
                          derive_seed(repetition_seed(config.seed, rep), "classifier"), config.classifier,
                          slices);
}

std::vector<SweepRow> sweep_epsilon(const PreparedData& data, const RunConfig& config,
                                    std::span<const double> epsilons, const fs::path& out_dir,
                                    const std::function<void(const std::string&)>& log) {
  if (epsilons.empty()) throw ConfigError("sweep: empty epsilon list");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw ConfigError("sweep: epsilon must be positive (inf disables DP)");
  }
  const bool write = !out_dir.empty();
  if (write) fs::create_directories(out_dir);
  const DiscreteMarginals train_marginals = discrete_marginals(data.train_encoded, data.schema);
  std::vector<std::string> bernoulli_names;
  for (const auto& f : data.schema.features) {
    if (f.kind == FeatureKind::kBernoulli) bernoulli_names.push_back(f.name);
  }

  std::vector<SweepRow> rows;
  auto flush = [&] {
    if (!write) return;
    std::string table = "epsilon,rep,seed,sigma,final_epsilon,selected_epoch,auroc,auprc,accuracy,degenerate\n";
    std::string summary =
        "epsilon,reps,auroc_mean,auroc_half_width,auprc_mean,auprc_half_width,accuracy_mean,accuracy_half_width\n";
    std::string scatter = "epsilon,rep,feature,train_p,generated_p\n";
    for (const auto& row : rows) {
      const std::string eps = epsilon_label(row.epsilon);
      for (const auto& r : row.reps) {
        const auto& m = r.utility.metrics;
        table += eps + "," + std::to_string(r.rep) + "," + std::to_string(r.seed) + "," + fmt(r.sigma) + "," +
                 fmt(r.final_epsilon) + "," + std::to_string(r.selected_epoch) + "," + fmt(m.auroc) + "," +
                 fmt(m.auprc) + "," + fmt(m.accuracy) + "," + (r.utility.degenerate ? "1" : "0") + "\n";
        for (std::size_t i = 0; i < bernoulli_names.size(); ++i) {
          scatter += eps + "," + std::to_string(r.rep) + "," + bernoulli_names[i] + "," +
                     fmt(train_marginals.bernoulli[i]) + "," + fmt(r.marginals.bernoulli[i]) + "\n";
        }
      }
      if (row.summary.accuracy.values.empty()) continue;  // unfinished
      const auto& s = row.summary;
      summary += eps + "," + std::to_string(row.reps.size()) + "," +
                 (s.auroc ? fmt(s.auroc->mean) + "," + fmt(s.auroc->half_width) : std::string(",")) + "," +
                 (s.auprc ? fmt(s.auprc->mean) + "," + fmt(s.auprc->half_width) : std::string(",")) + "," +
                 fmt(s.accuracy.mean) + "," + fmt(s.accuracy.half_width) + "\n";
    }
    write_file(out_dir / "sweep_table.csv", table);
    write_file(out_dir / "sweep_summary.csv", summary);
    write_file(out_dir / "bernoulli_scatter.csv", scatter);
  };

  for (double eps : epsilons) {
    RunConfig c = config;
    if (std::isinf(eps)) {
      c.dp.reset();
    } else {
      if (!c.dp) c.dp = DpOptions{};
      c.dp->epsilon = eps;
    }
    rows.push_back({eps, {}, {}});
    SweepRow& row = rows.back();
    for (std::size_t k = 1; k <= c.reps; ++k) {
      const fs::path dir =
          write ? out_dir / ("eps_" + epsilon_label(eps)) / ("rep_" + std::to_string(k)) : fs::path();
      if (log) log("epsilon " + epsilon_label(eps) + " rep " + std::to_string(k));
      try {
        row.reps.push_back(run_repetition(data, c, k, dir));
      } catch (const Error& e) {
        flush();
        throw RunError("sweep aborted at epsilon " + epsilon_label(eps) + " rep " + std::to_string(k) +
                       ": " + e.what());
      }
      flush();
    }
    std::vector<UtilityMetrics> metrics;
    for (const auto& r : row.reps) metrics.push_back(r.utility.metrics);
    row.summary = summarize_utility(metrics);
    flush();
  }
  return rows;
}

}  // namespace ehrgan

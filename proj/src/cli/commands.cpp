#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include <openssl/evp.h>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "ddi/cli.hpp"
#include "ddi/csv.hpp"
#include "ddi/error.hpp"
#include "ddi/rbscore.hpp"

namespace ddi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDatasetFile = "dataset.csv";
constexpr const char* kModelFile = "model.json";
constexpr const char* kBestConfigFile = "best_config.json";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::vector<fs::path> catalog_inputs(const RunConfig& c) {
  std::vector<fs::path> files{c.paths.drugs, c.paths.mol2vec, c.paths.smilesbert, c.paths.profiles};
  if (!c.paths.scaffolds.empty()) files.push_back(c.paths.scaffolds);
  return files;
}

fs::path dataset_path(const RunConfig& c) { return c.paths.output_dir / kDatasetFile; }

Dataset require_dataset(const RunConfig& c) {
  const fs::path p = dataset_path(c);
  if (!fs::is_regular_file(p)) {
    throw ValidationError("prepared dataset not found at " + p.string() + " (run `ddi prepare` first)");
  }
  return load_dataset(p);
}

std::vector<int> binary_labels(std::span<const corpus::PairInstance> pairs) {
  std::vector<int> y;
  y.reserve(pairs.size());
  for (const auto& p : pairs) y.push_back(mlp::binary_label(p.label));
  return y;
}

std::vector<corpus::PairInstance> concat(std::span<const corpus::PairInstance> a,
                                         std::span<const corpus::PairInstance> b) {
  std::vector<corpus::PairInstance> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

features::FeatureFn feature_fn(const RunConfig& c, const features::PairFeaturizer& featurizer,
                               std::span<const corpus::PairInstance> pairs) {
  return c.materialize ? featurizer.materialize(pairs) : featurizer.lazy();
}

json options_json(const features::FeatureOptions& o) {
  return {{"lambda1", o.lambda1}, {"tau_se", o.tau_se}, {"include_rbscore", o.include_rbscore}};
}

features::FeatureOptions options_from_json(const json& j) {
  features::FeatureOptions o;
  o.lambda1 = j.at("lambda1").get<double>();
  o.tau_se = j.at("tau_se").get<double>();
  o.include_rbscore = j.at("include_rbscore").get<bool>();
  return o;
}

struct LoadedModel {
  mlp::Model model;
  features::FeatureOptions options;
};

LoadedModel load_model(const RunConfig& c) {
  const fs::path p = c.paths.output_dir / kModelFile;
  if (!fs::is_regular_file(p)) {
    throw ValidationError("model checkpoint not found at " + p.string() + " (run `ddi train` first)");
  }
  auto ck = mlp::load_checkpoint(p);
  LoadedModel out{std::move(ck.model), c.feature_options()};
  try {
    if (ck.metadata.contains("feature_options")) out.options = options_from_json(ck.metadata["feature_options"]);
  } catch (const json::exception& e) {
    throw ValidationError(p.string() + ": bad feature_options metadata: " + e.what());
  }
  return out;
}

struct QueryRow {
  std::size_t line = 0;
  std::string drug_a;
  std::string drug_b;
};

std::vector<QueryRow> read_query(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<QueryRow> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = csv::chomp(line);
    if (csv::trim(view).empty()) continue;
    const auto fields = csv::split_line(view);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 2 || csv::trim(fields[0]) != "drug_a" || csv::trim(fields[1]) != "drug_b") {
        throw ParseError(path.string(), lineno, "expected header 'drug_a,drug_b'");
      }
      continue;
    }
    if (fields.size() < 2) throw ParseError(path.string(), lineno, "malformed line: expected drug_a,drug_b");
    rows.push_back({lineno, std::string(csv::trim(fields[0])), std::string(csv::trim(fields[1]))});
  }
  return rows;
}

// Canonical pair for a query row, or an error message.
std::variant<corpus::PairInstance, std::string> resolve_query(const QueryRow& row,
                                                              const corpus::DrugCatalog& catalog) {
  for (const auto* id : {&row.drug_a, &row.drug_b}) {
    if (!catalog.contains(*id)) return "unknown drug_id '" + *id + "'";
  }
  if (row.drug_a == row.drug_b) return "self-pair '" + row.drug_a + "'";
  auto [a, b] = corpus::canonical_pair(row.drug_a, row.drug_b);
  return corpus::PairInstance{a, b, corpus::PairLabel::Unknown};
}

std::string num(double v) { return fmt::format("{}", v); }

json split_counts(std::span<const corpus::PairInstance> pairs) {
  std::size_t pos = 0, neg = 0, unk = 0;
  for (const auto& p : pairs) {
    switch (p.label) {
      case corpus::PairLabel::Positive: ++pos; break;
      case corpus::PairLabel::ReliableNegative: ++neg; break;
      case corpus::PairLabel::Unknown: ++unk; break;
    }
  }
  return {{"positive", pos}, {"reliable_negative", neg}, {"unknown", unk}, {"total", pairs.size()}};
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("sha256: out of memory");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void write_run_manifest(const RunConfig& c, std::string_view command, std::span<const fs::path> inputs,
                        const json& extra) {
  json files = json::array();
  for (const auto& p : inputs) {
    if (p.empty() || !fs::is_regular_file(p)) continue;
    files.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  }
  json j{{"command", std::string(command)},
         {"version", version()},
         {"config", to_json(c)},
         {"inputs", std::move(files)}};
  if (!extra.empty()) j["result"] = extra;
  write_text(c.paths.output_dir / "run.json", j.dump(2) + "\n");
}

corpus::DrugCatalog load_catalog(const RunConfig& c) {
  const std::array<fs::path, 2> embeddings{c.paths.mol2vec, c.paths.smilesbert};
  auto catalog = corpus::load_catalog(c.paths.drugs, embeddings, c.paths.profiles);
  if (!c.paths.scaffolds.empty()) corpus::merge_scaffolds(catalog, c.paths.scaffolds);
  return catalog;
}

const std::vector<corpus::PairInstance>& Dataset::split(std::string_view name) const {
  if (name == "train") return train;
  if (name == "validation" || name == "val") return validation;
  if (name == "test") return test;
  throw ValidationError("unknown split '" + std::string(name) + "' (train | validation | test)");
}

Dataset load_dataset(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open " + file.string());
  Dataset d;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = csv::chomp(line);
    if (csv::trim(view).empty()) continue;
    const auto f = csv::split_line(view);
    if (!header_seen) {
      header_seen = true;
      if (f.size() != 4 || f[0] != "drug_a" || f[1] != "drug_b" || f[2] != "label" || f[3] != "split") {
        throw ParseError(file.string(), lineno, "expected header 'drug_a,drug_b,label,split'");
      }
      continue;
    }
    if (f.size() != 4) throw ParseError(file.string(), lineno, "malformed line: expected 4 fields");
    corpus::PairInstance p{f[0], f[1], corpus::PairLabel::Unknown};
    try {
      p.label = corpus::parse_label(f[2]);
    } catch (const ValidationError& e) {
      throw ParseError(file.string(), lineno, e.what());
    }
    const std::string& s = f[3];
    std::vector<corpus::PairInstance>* target = nullptr;
    if (s == "train") target = &d.train;
    if (s == "validation") target = &d.validation;
    if (s == "test") target = &d.test;
    if (s == "unlabeled") target = &d.unlabeled;
    if (s == "dropped") target = &d.dropped;
    if (!target) throw ParseError(file.string(), lineno, "unknown split '" + s + "'");
    target->push_back(std::move(p));
  }
  if (!header_seen) throw ParseError(file.string(), 1, "empty dataset file");
  return d;
}

json cmd_prepare(const RunConfig& c) {
  check_inputs(c, true);
  const auto catalog = load_catalog(c);
  const auto raw = corpus::load_pairs(c.paths.pairs);
  const auto all = corpus::assign_pu_labels(raw, catalog, c.tau_neg);

  std::vector<corpus::PairInstance> labeled, unlabeled;
  for (const auto& p : all) (p.label == corpus::PairLabel::Unknown ? unlabeled : labeled).push_back(p);
  const auto split = corpus::split_dataset(labeled, c.protocol, c.ratios, c.split_seed, &catalog);

  std::set<std::string> kept;
  for (const auto* part : {&split.train, &split.validation, &split.test}) {
    for (const auto& p : *part) kept.insert(p.key());
  }
  std::vector<corpus::PairInstance> dropped;
  for (const auto& p : labeled) {
    if (!kept.contains(p.key())) dropped.push_back(p);
  }

  std::ostringstream out;
  out << "drug_a,drug_b,label,split\n";
  auto emit = [&](std::span<const corpus::PairInstance> pairs, const char* name) {
    for (const auto& p : pairs) {
      out << p.drug_a << ',' << p.drug_b << ',' << corpus::to_string(p.label) << ',' << name << '\n';
    }
  };
  emit(split.train, "train");
  emit(split.validation, "validation");
  emit(split.test, "test");
  emit(dropped, "dropped");
  emit(unlabeled, "unlabeled");
  write_text(dataset_path(c), out.str());

  json manifest{{"protocol", std::string(corpus::to_string(c.protocol))},
                {"seed", c.split_seed},
                {"ratios", {c.ratios.train, c.ratios.validation, c.ratios.test}},
                {"tau_neg", c.tau_neg},
                {"drugs", catalog.size()},
                {"pairs", split_counts(all)},
                {"splits",
                 {{"train", split_counts(split.train)},
                  {"validation", split_counts(split.validation)},
                  {"test", split_counts(split.test)}}},
                {"dropped_cross_partition", split.dropped},
                {"unlabeled", unlabeled.size()}};
  write_text(c.paths.output_dir / "manifest.json", manifest.dump(2) + "\n");

  auto inputs = catalog_inputs(c);
  inputs.push_back(c.paths.pairs);
  write_run_manifest(c, "prepare", inputs, manifest);
  return manifest;
}

json cmd_optimize(const RunConfig& c) {
  check_inputs(c, false);
  const auto catalog = load_catalog(c);
  const Dataset data = require_dataset(c);
  const auto weights = corpus::class_weights(data.train);
  const features::PairFeaturizer shared(catalog, c.feature_options());
  const auto both = concat(data.train, data.validation);
  const features::FeatureFn shared_fn = feature_fn(c, shared, both);

  hyperopt::SearchSpace space;
  space.search_lambda1 = c.search_lambda1;

  const hyperopt::FitnessFn fitness = [&](const hyperopt::Candidate& cand, std::uint64_t seed) {
    mlp::Config base = c.mlp;
    base.seed = seed;
    base.max_epochs = c.search_max_epochs;
    base.patience = c.search_patience;
    const mlp::Config cfg = space.to_config(cand, base);
    std::optional<features::PairFeaturizer> local;
    features::FeatureFn local_fn;
    const features::FeatureFn* fn = &shared_fn;
    if (auto l1 = space.lambda1(cand)) {
      auto options = c.feature_options();
      options.lambda1 = *l1;
      local.emplace(catalog, options);
      local_fn = feature_fn(c, *local, both);
      fn = &local_fn;
    }
    const auto model = mlp::init_model(cfg, shared.input_dim());
    const auto result = mlp::train(model, data.train, data.validation, *fn, weights, cfg.training());
    return result.best_val_auc;
  };

  json per_seed = json::array();
  std::optional<hyperopt::Result> overall;
  std::uint64_t overall_seed = 0;
  for (std::uint64_t seed : c.seeds) {
    const auto settings = optimizer_settings(c, seed);
    mlp::Config base = c.mlp;
    base.seed = seed;
    spdlog::info("optimize: seed {} ({} budget, at most {} evaluations)", seed, to_string(c.budget),
                 settings.max_evaluations());
    auto result = hyperopt::optimize(space, fitness, settings, base);
    write_text(c.paths.output_dir / fmt::format("optimizer_log_seed{}.csv", seed),
               hyperopt::log_csv(result.log));
    per_seed.push_back({{"seed", seed},
                        {"best_fitness", result.best_fitness},
                        {"best_config", result.best_config},
                        {"evaluations", result.log.size()},
                        {"failures", result.failures},
                        {"aco_iterations", result.aco_iterations_run},
                        {"pso_iterations", result.pso_iterations_run}});
    spdlog::info("optimize: seed {} best validation ROC-AUC {:.4f}", seed, result.best_fitness);
    if (!overall || result.best_fitness > overall->best_fitness) {
      overall = std::move(result);
      overall_seed = seed;
    }
  }

  write_text(c.paths.output_dir / kBestConfigFile, overall->best_config.dump(2) + "\n");
  json summary{{"budget", std::string(to_string(c.budget))},
               {"seeds", per_seed},
               {"best_seed", overall_seed},
               {"best_fitness", overall->best_fitness},
               {"best_config", overall->best_config}};
  write_text(c.paths.output_dir / "optimize_summary.json", summary.dump(2) + "\n");

  auto inputs = catalog_inputs(c);
  inputs.push_back(dataset_path(c));
  write_run_manifest(c, "optimize", inputs, {{"best_seed", overall_seed}, {"best_fitness", overall->best_fitness}});
  return summary;
}

json cmd_train(const RunConfig& c, const std::optional<fs::path>& mlp_config_file) {
  check_inputs(c, false);
  const auto catalog = load_catalog(c);
  const Dataset data = require_dataset(c);

  fs::path source;
  json config_json = mlp::to_json(c.mlp);
  if (mlp_config_file) {
    source = *mlp_config_file;
  } else if (fs::is_regular_file(c.paths.output_dir / kBestConfigFile)) {
    source = c.paths.output_dir / kBestConfigFile;
  }
  if (!source.empty()) config_json = read_json(source);
  const mlp::Config cfg = mlp::config_from_json(config_json, c.mlp);
  auto options = c.feature_options();
  if (config_json.contains("lambda1")) options.lambda1 = config_json["lambda1"].get<double>();
  spdlog::info("train: config from {}", source.empty() ? std::string("run config") : source.string());

  const features::PairFeaturizer featurizer(catalog, options);
  const auto both = concat(data.train, data.validation);
  const auto fn = feature_fn(c, featurizer, both);
  const auto weights = corpus::class_weights(data.train);
  const auto model = mlp::init_model(cfg, featurizer.input_dim());
  const auto result = mlp::train(model, data.train, data.validation, fn, weights, cfg.training());

  mlp::Checkpoint ck{result.model,
                     {{"feature_options", options_json(options)},
                      {"best_epoch", result.best_epoch},
                      {"best_val_auc", result.best_val_auc},
                      {"class_weights", {weights.positive, weights.negative}}}};
  mlp::save_checkpoint(c.paths.output_dir / kModelFile, ck);

  std::ostringstream hist;
  hist << "epoch,train_loss,val_auc\n";
  for (const auto& e : result.history) {
    hist << e.epoch << ',' << num(e.train_loss) << ',' << (std::isnan(e.val_auc) ? "nan" : num(e.val_auc))
         << '\n';
  }
  write_text(c.paths.output_dir / "train_history.csv", hist.str());

  json summary{{"config", mlp::to_json(cfg)},
               {"feature_options", options_json(options)},
               {"epochs_run", result.history.size()},
               {"best_epoch", result.best_epoch},
               {"best_val_auc", result.best_val_auc}};
  auto inputs = catalog_inputs(c);
  inputs.push_back(dataset_path(c));
  if (!source.empty()) inputs.push_back(source);
  write_run_manifest(c, "train", inputs, summary);
  return summary;
}

eval::MetricReport cmd_evaluate(const RunConfig& c, std::string_view split_name, bool write_curves) {
  check_inputs(c, false);
  const auto catalog = load_catalog(c);
  const Dataset data = require_dataset(c);
  const auto& pairs = data.split(split_name);
  if (pairs.empty()) throw ValidationError("split '" + std::string(split_name) + "' is empty");
  const auto loaded = load_model(c);
  const features::PairFeaturizer featurizer(catalog, loaded.options);
  if (featurizer.input_dim() != loaded.model.input_dim()) {
    throw ValidationError("model expects " + std::to_string(loaded.model.input_dim()) +
                          " inputs but the features have " + std::to_string(featurizer.input_dim()));
  }
  const auto scores = mlp::predict_batch(loaded.model, pairs, featurizer.lazy());
  const auto labels = binary_labels(pairs);

  eval::ReportOptions ro;
  ro.threshold = c.threshold;
  ro.resamples = c.bootstrap_resamples;
  ro.seed = c.bootstrap_seed;
  ro.workers = c.workers;
  const auto report = eval::build_report(scores, labels, ro);

  json j = eval::to_json(report);
  j["split"] = std::string(split_name);
  const std::string stem = "report_" + std::string(split_name);
  write_text(c.paths.output_dir / (stem + ".json"), j.dump(2) + "\n");
  write_text(c.paths.output_dir / (stem + ".txt"), eval::to_table(report));
  if (write_curves) {
    write_text(c.paths.output_dir / ("roc_" + std::string(split_name) + ".csv"),
               eval::curve_csv(eval::roc_curve(scores, labels)));
    write_text(c.paths.output_dir / ("pr_" + std::string(split_name) + ".csv"),
               eval::curve_csv(eval::pr_curve(scores, labels)));
  }

  auto inputs = catalog_inputs(c);
  inputs.push_back(dataset_path(c));
  inputs.push_back(c.paths.output_dir / kModelFile);
  write_run_manifest(c, "evaluate", inputs,
                     {{"split", std::string(split_name)},
                      {"roc_auc", report.roc_auc.value},
                      {"pr_auc", report.pr_auc.value}});
  return report;
}

std::size_t cmd_predict(const RunConfig& c, const fs::path& query_file, const fs::path& out_file) {
  check_inputs(c, false);
  const auto catalog = load_catalog(c);
  const auto loaded = load_model(c);
  const features::PairFeaturizer featurizer(catalog, loaded.options);
  const auto rows = read_query(query_file);

  std::vector<corpus::PairInstance> valid;
  std::vector<std::string> errors(rows.size());
  std::vector<std::size_t> slot(rows.size(), 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = resolve_query(rows[i], catalog);
    if (auto* err = std::get_if<std::string>(&r)) {
      errors[i] = *err;
      spdlog::error("{}:{}: {}", query_file.string(), rows[i].line, *err);
    } else {
      slot[i] = valid.size();
      valid.push_back(std::get<corpus::PairInstance>(std::move(r)));
    }
  }
  const auto probs = mlp::predict_batch(loaded.model, valid, featurizer.lazy());

  std::ostringstream out;
  out << "drug_a,drug_b,probability,error\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << csv::escape(rows[i].drug_a) << ',' << csv::escape(rows[i].drug_b) << ',';
    if (errors[i].empty()) {
      out << num(probs[slot[i]]) << ",\n";
    } else {
      ++failed;
      out << ',' << csv::escape(errors[i]) << '\n';
    }
  }
  write_text(out_file, out.str());

  auto inputs = catalog_inputs(c);
  inputs.push_back(c.paths.output_dir / kModelFile);
  inputs.push_back(query_file);
  write_run_manifest(c, "predict", inputs, {{"rows", rows.size()}, {"failed", failed}});
  return failed;
}

std::vector<eval::RankedPair> cmd_rank(const RunConfig& c, std::size_t k,
                                       const std::optional<fs::path>& query_file) {
  check_inputs(c, false);
  const auto catalog = load_catalog(c);
  const auto loaded = load_model(c);
  const features::PairFeaturizer featurizer(catalog, loaded.options);

  std::vector<corpus::PairInstance> candidates;
  if (query_file) {
    for (const auto& row : read_query(*query_file)) {
      auto r = resolve_query(row, catalog);
      if (auto* err = std::get_if<std::string>(&r)) {
        throw ParseError(query_file->string(), row.line, *err);
      }
      candidates.push_back(std::get<corpus::PairInstance>(std::move(r)));
    }
  } else {
    candidates = require_dataset(c).unlabeled;
  }
  if (candidates.empty()) throw ValidationError("rank: no candidate pairs to score");
  const auto probs = mlp::predict_batch(loaded.model, candidates, featurizer.lazy());
  const auto top = eval::rank_top_k(probs, candidates, k);

  std::ostringstream out;
  out << "drug_a,drug_b,probability\n";
  for (const auto& r : top) out << r.drug_a << ',' << r.drug_b << ',' << num(r.probability) << '\n';
  write_text(c.paths.output_dir / "top_k.csv", out.str());

  auto inputs = catalog_inputs(c);
  inputs.push_back(c.paths.output_dir / kModelFile);
  if (query_file) {
    inputs.push_back(*query_file);
  } else {
    inputs.push_back(dataset_path(c));
  }
  write_run_manifest(c, "rank", inputs, {{"k", k}, {"candidates", candidates.size()}});
  return top;
}

json cmd_rbscore_explain(const RunConfig& c, std::string_view a, std::string_view b) {
  c.validate();
  const auto catalog = load_catalog(c);
  const auto r = rbscore::score_pair(catalog.at(a).profile, catalog.at(b).profile, c.tau_se);
  const auto& pa = catalog.at(a).profile;
  const auto& pb = catalog.at(b).profile;
  return {{"drug_a", std::string(a)},
          {"drug_b", std::string(b)},
          {"tau_se", c.tau_se},
          {"rules",
           {{"shared_enzyme", r.shared_enzyme},
            {"shared_target", r.shared_target},
            {"atc_level3_match", r.atc_match},
            {"therapeutic_group_match", r.group_match},
            {"side_effect_similarity_above_tau", r.side_effect_sim_hit},
            {"strong_pk_modulator", r.pk_modulator}}},
          {"side_effect_jaccard", rbscore::side_effect_similarity(pa.side_effects, pb.side_effects)},
          {"raw_sum", r.raw_sum},
          {"normalized", r.normalized}};
}

void cmd_features_dump(const RunConfig& c, const std::optional<fs::path>& query_file,
                       const fs::path& out_file) {
  check_inputs(c, false);
  const auto catalog = load_catalog(c);
  const features::PairFeaturizer featurizer(catalog, c.feature_options());

  std::vector<corpus::PairInstance> pairs;
  if (query_file) {
    for (const auto& row : read_query(*query_file)) {
      auto r = resolve_query(row, catalog);
      if (auto* err = std::get_if<std::string>(&r)) throw ParseError(query_file->string(), row.line, *err);
      pairs.push_back(std::get<corpus::PairInstance>(std::move(r)));
    }
  } else {
    const Dataset d = require_dataset(c);
    for (const auto* part : {&d.train, &d.validation, &d.test, &d.dropped, &d.unlabeled}) {
      pairs.insert(pairs.end(), part->begin(), part->end());
    }
  }

  const std::size_t d4 = 4 * featurizer.embedding_dim();
  std::ostringstream out;
  out << "drug_a,drug_b";
  for (std::size_t k = 0; k < d4; ++k) out << ",f_" << k;
  if (c.include_rbscore) out << ",rbscore";
  out << '\n';
  std::vector<double> row(featurizer.input_dim());
  for (const auto& p : pairs) {
    featurizer.compute(p.drug_a, p.drug_b, row);
    out << p.drug_a << ',' << p.drug_b;
    for (double v : row) out << ',' << num(v);
    out << '\n';
  }
  write_text(out_file, out.str());
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
  return kExitRuntime;
}

}  // namespace ddi::cli

#include <fstream>

#include "ddi/cli.hpp"
#include "ddi/error.hpp"

namespace ddi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base_dir, const std::string& text) {
  fs::path p(text);
  if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

void read_path(const json& obj, const char* key, const fs::path& base_dir, fs::path& out) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) {
    out = resolve(base_dir, it->get<std::string>());
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) out = it->get<T>();
}

std::string_view to_string(hyperopt::Heuristic h) {
  return h == hyperopt::Heuristic::Uniform ? "uniform" : "mean_fitness";
}

hyperopt::Heuristic parse_heuristic(std::string_view text) {
  if (text == "uniform") return hyperopt::Heuristic::Uniform;
  if (text == "mean_fitness") return hyperopt::Heuristic::MeanFitness;
  throw ValidationError("unknown heuristic '" + std::string(text) + "' (uniform | mean_fitness)");
}

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw ValidationError(std::string("missing path for ") + what);
  if (!fs::is_regular_file(p)) {
    throw ValidationError(std::string(what) + " file not found: " + p.string());
  }
}

}  // namespace

std::string version() {
#ifdef DDI_VERSION
  return DDI_VERSION;
#else
  return "0.1.0+unknown";
#endif
}

std::string_view to_string(Budget budget) { return budget == Budget::Full ? "full" : "smoke"; }

Budget parse_budget(std::string_view text) {
  if (text == "full") return Budget::Full;
  if (text == "smoke") return Budget::Smoke;
  throw ValidationError("unknown budget '" + std::string(text) + "' (full | smoke)");
}

void RunConfig::validate() const {
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) throw ValidationError("lambda1 must lie in [0, 1]");
  if (!(tau_se >= 0.0 && tau_se <= 1.0)) throw ValidationError("tau_se must lie in [0, 1]");
  if (!(tau_neg >= 0.0 && tau_neg <= 1.0)) throw ValidationError("tau_neg must lie in [0, 1]");
  corpus::validate_ratios(ratios);
  mlp.validate();
  if (seeds.empty()) throw ValidationError("optimizer seed list must not be empty");
  if (search_max_epochs < 1) throw ValidationError("optimizer max_epochs must be at least 1");
  if (search_patience < 1) throw ValidationError("optimizer patience must be at least 1");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in [0, 1]");
  if (bootstrap_resamples < 100) throw ValidationError("bootstrap_resamples must be at least 100");
  if (top_k < 1) throw ValidationError("top_k must be at least 1");
  if (workers < 1) throw ValidationError("workers must be at least 1");
  if (paths.output_dir.empty()) throw ValidationError("output_dir must be set");
}

json to_json(const RunConfig& c) {
  return {{"paths",
           {{"drugs", c.paths.drugs.string()},
            {"mol2vec", c.paths.mol2vec.string()},
            {"smilesbert", c.paths.smilesbert.string()},
            {"profiles", c.paths.profiles.string()},
            {"pairs", c.paths.pairs.string()},
            {"scaffolds", c.paths.scaffolds.string()},
            {"output_dir", c.paths.output_dir.string()}}},
          {"lambda1", c.lambda1},
          {"tau_se", c.tau_se},
          {"tau_neg", c.tau_neg},
          {"include_rbscore", c.include_rbscore},
          {"materialize", c.materialize},
          {"split",
           {{"protocol", std::string(corpus::to_string(c.protocol))},
            {"train", c.ratios.train},
            {"validation", c.ratios.validation},
            {"test", c.ratios.test},
            {"seed", c.split_seed}}},
          {"mlp", mlp::to_json(c.mlp)},
          {"optimizer",
           {{"budget", std::string(to_string(c.budget))},
            {"heuristic", std::string(to_string(c.heuristic))},
            {"search_lambda1", c.search_lambda1},
            {"seeds", c.seeds},
            {"max_epochs", c.search_max_epochs},
            {"patience", c.search_patience}}},
          {"eval",
           {{"threshold", c.threshold},
            {"bootstrap_resamples", c.bootstrap_resamples},
            {"bootstrap_seed", c.bootstrap_seed},
            {"top_k", c.top_k}}},
          {"workers", c.workers}};
}

RunConfig config_from_json(const json& j, const fs::path& base_dir, RunConfig c) {
  if (!j.is_object()) throw ValidationError("run config must be a JSON object");
  try {
    if (auto it = j.find("paths"); it != j.end()) {
      const json& p = *it;
      read_path(p, "drugs", base_dir, c.paths.drugs);
      read_path(p, "mol2vec", base_dir, c.paths.mol2vec);
      read_path(p, "smilesbert", base_dir, c.paths.smilesbert);
      read_path(p, "profiles", base_dir, c.paths.profiles);
      read_path(p, "pairs", base_dir, c.paths.pairs);
      read_path(p, "scaffolds", base_dir, c.paths.scaffolds);
      read_path(p, "output_dir", base_dir, c.paths.output_dir);
    }
    read(j, "lambda1", c.lambda1);
    read(j, "tau_se", c.tau_se);
    read(j, "tau_neg", c.tau_neg);
    read(j, "include_rbscore", c.include_rbscore);
    read(j, "materialize", c.materialize);
    if (auto it = j.find("split"); it != j.end()) {
      const json& s = *it;
      if (auto p = s.find("protocol"); p != s.end()) c.protocol = corpus::parse_protocol(p->get<std::string>());
      read(s, "train", c.ratios.train);
      read(s, "validation", c.ratios.validation);
      read(s, "test", c.ratios.test);
      read(s, "seed", c.split_seed);
    }
    if (auto it = j.find("mlp"); it != j.end()) c.mlp = mlp::config_from_json(*it, c.mlp);
    if (auto it = j.find("optimizer"); it != j.end()) {
      const json& o = *it;
      if (auto b = o.find("budget"); b != o.end()) c.budget = parse_budget(b->get<std::string>());
      if (auto h = o.find("heuristic"); h != o.end()) c.heuristic = parse_heuristic(h->get<std::string>());
      read(o, "search_lambda1", c.search_lambda1);
      read(o, "seeds", c.seeds);
      read(o, "max_epochs", c.search_max_epochs);
      read(o, "patience", c.search_patience);
    }
    if (auto it = j.find("eval"); it != j.end()) {
      const json& e = *it;
      read(e, "threshold", c.threshold);
      read(e, "bootstrap_resamples", c.bootstrap_resamples);
      read(e, "bootstrap_seed", c.bootstrap_seed);
      read(e, "top_k", c.top_k);
    }
    read(j, "workers", c.workers);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad run config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& file, RunConfig base) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open config file " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(file.string() + ": invalid JSON: " + e.what());
  }
  return config_from_json(j, file.parent_path(), std::move(base));
}

void check_inputs(const RunConfig& c, bool need_pairs) {
  c.validate();
  require_file(c.paths.drugs, "drugs");
  require_file(c.paths.mol2vec, "mol2vec embedding");
  require_file(c.paths.smilesbert, "smilesbert embedding");
  require_file(c.paths.profiles, "profiles");
  if (!c.paths.scaffolds.empty()) require_file(c.paths.scaffolds, "scaffolds");
  if (need_pairs) require_file(c.paths.pairs, "pairs");
  std::error_code ec;
  fs::create_directories(c.paths.output_dir, ec);
  if (ec || !fs::is_directory(c.paths.output_dir)) {
    throw ValidationError("output directory not writable: " + c.paths.output_dir.string());
  }
}

hyperopt::Settings optimizer_settings(const RunConfig& c, std::uint64_t seed) {
  hyperopt::Settings s = c.budget == Budget::Full ? hyperopt::Settings::full() : hyperopt::Settings::smoke();
  s.heuristic = c.heuristic;
  s.seed = seed;
  s.workers = c.workers;
  return s;
}

}  // namespace ddi::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddi/corpus.hpp"
#include "ddi/eval.hpp"
#include "ddi/features.hpp"
#include "ddi/hyperopt.hpp"
#include "ddi/mlp.hpp"
#include "json.hpp"

namespace ddi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

std::string version();

enum class Budget { Full, Smoke };
std::string_view to_string(Budget budget);
Budget parse_budget(std::string_view text);

struct Paths {
  std::filesystem::path drugs;
  std::filesystem::path mol2vec;
  std::filesystem::path smilesbert;
  std::filesystem::path profiles;
  std::filesystem::path pairs;
  std::filesystem::path scaffolds;  // optional
  std::filesystem::path output_dir = "ddi_out";
};

// Everything a run needs. JSON layout (every key optional):
//   {"paths": {"drugs", "mol2vec", "smilesbert", "profiles", "pairs",
//              "scaffolds", "output_dir"},
//    "lambda1", "tau_se", "tau_neg", "include_rbscore", "materialize",
//    "split": {"protocol", "train", "validation", "test", "seed"},
//    "mlp": {MLP config keys},
//    "optimizer": {"budget", "heuristic", "search_lambda1", "seeds",
//                  "max_epochs", "patience"},
//    "eval": {"threshold", "bootstrap_resamples", "bootstrap_seed", "top_k"},
//    "workers"}
// Relative paths resolve against the config file's directory.
struct RunConfig {
  Paths paths;
  double lambda1 = features::kDefaultLambda1;
  double tau_se = rbscore::kDefaultTauSe;
  double tau_neg = corpus::kDefaultTauNeg;
  bool include_rbscore = true;
  bool materialize = false;

  corpus::SplitProtocol protocol = corpus::SplitProtocol::Random;
  corpus::SplitRatios ratios;
  std::uint64_t split_seed = 13;

  mlp::Config mlp;

  Budget budget = Budget::Full;
  hyperopt::Heuristic heuristic = hyperopt::Heuristic::Uniform;
  bool search_lambda1 = false;
  // Epoch cap and patience for each fitness evaluation; final training
  // uses the mlp block instead.
  int search_max_epochs = 30;
  int search_patience = 5;
  std::vector<std::uint64_t> seeds{std::begin(hyperopt::kDefaultSeeds),
                                   std::end(hyperopt::kDefaultSeeds)};

  double threshold = eval::kDefaultThreshold;
  std::size_t bootstrap_resamples = eval::kDefaultResamples;
  std::uint64_t bootstrap_seed = 13;
  std::size_t top_k = 20;

  std::size_t workers = 1;

  features::FeatureOptions feature_options() const {
    return {lambda1, tau_se, include_rbscore};
  }
  // Range checks on every scalar; throws ValidationError.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                           RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& file, RunConfig base = {});

// Checks that the catalog inputs (and the pairs file when need_pairs) exist
// and that the output directory can be created.
void check_inputs(const RunConfig& config, bool need_pairs);

hyperopt::Settings optimizer_settings(const RunConfig& config, std::uint64_t seed);

std::string sha256_file(const std::filesystem::path& path);

// Writes <output_dir>/run.json: command, version, resolved config and the
// SHA-256 of every input file.
void write_run_manifest(const RunConfig& config, std::string_view command,
                        std::span<const std::filesystem::path> inputs,
                        const nlohmann::json& extra = nlohmann::json::object());

corpus::DrugCatalog load_catalog(const RunConfig& config);

// Pairs of dataset.csv grouped by their split column.
struct Dataset {
  std::vector<corpus::PairInstance> train;
  std::vector<corpus::PairInstance> validation;
  std::vector<corpus::PairInstance> test;
  std::vector<corpus::PairInstance> unlabeled;
  std::vector<corpus::PairInstance> dropped;

  const std::vector<corpus::PairInstance>& split(std::string_view name) const;
};

Dataset load_dataset(const std::filesystem::path& file);

// prepare: PU labels and split; writes dataset.csv and manifest.json.
nlohmann::json cmd_prepare(const RunConfig& config);

// optimize: one optimizer run per seed; writes optimizer_log_seed<N>.csv,
// best_config.json and optimize_summary.json.
nlohmann::json cmd_optimize(const RunConfig& config);

// train: uses mlp_config_file when given, else <output_dir>/best_config.json
// when present, else config.mlp. Writes model.json and train_history.csv.
nlohmann::json cmd_train(const RunConfig& config,
                         const std::optional<std::filesystem::path>& mlp_config_file = {});

// evaluate: writes report_<split>.json / .txt (and curve CSVs when asked).
eval::MetricReport cmd_evaluate(const RunConfig& config, std::string_view split,
                                bool write_curves = false);

// predict: scores every row of a `drug_a,drug_b` file into out_file with
// columns drug_a,drug_b,probability,error. Returns the number of failed rows.
std::size_t cmd_predict(const RunConfig& config, const std::filesystem::path& query_file,
                        const std::filesystem::path& out_file);

// rank: top-k of the unlabeled dataset pairs, or of query_file when given;
// writes top_k.csv (drug_a,drug_b,probability).
std::vector<eval::RankedPair> cmd_rank(const RunConfig& config, std::size_t k,
                                       const std::optional<std::filesystem::path>& query_file = {});

nlohmann::json cmd_rbscore_explain(const RunConfig& config, std::string_view a, std::string_view b);

// features dump: `drug_a,drug_b,f_0..f_{4d-1}[,rbscore]` for the query file,
// or for every dataset pair when no query is given.
void cmd_features_dump(const RunConfig& config,
                       const std::optional<std::filesystem::path>& query_file,
                       const std::filesystem::path& out_file);

// Maps an exception to the process exit code.
int exit_code_for(const std::exception& e);

}  // namespace ddi::cli

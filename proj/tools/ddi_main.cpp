// ddi: drug-drug interaction prediction pipeline.
//
//   ddi prepare   --config run.json
//   ddi optimize  --config run.json --budget smoke
//   ddi train     --config run.json
//   ddi evaluate  --config run.json --split test
//   ddi predict   --config run.json --query pairs.csv
//   ddi rank      --config run.json --k 20
//   ddi rbscore explain --config run.json --pair DB00001,DB00002
//   ddi features dump   --config run.json --query pairs.csv
//   ddi synth     --dir data/
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid input or config.

#include <cstdio>
#include <iostream>
#include <optional>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "ddi/cli.hpp"
#include "ddi/error.hpp"
#include "ddi/parallel.hpp"
#include "ddi/synthetic.hpp"

namespace {

using namespace ddi;
namespace fs = std::filesystem;

struct Overrides {
  std::optional<std::string> config_file;
  std::optional<std::string> drugs, mol2vec, smilesbert, profiles, pairs, scaffolds, out;
  std::optional<double> lambda1, tau_se, tau_neg, threshold;
  std::optional<std::string> protocol, budget, heuristic;
  std::optional<std::uint64_t> split_seed;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<int> max_epochs;
  std::optional<std::size_t> workers, resamples;
  bool no_rbscore = false;
  bool materialize = false;
  bool search_lambda1 = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_file, "Run config JSON");
  app->add_option("--drugs", o.drugs, "Drug CSV (drug_id,smiles)");
  app->add_option("--mol2vec", o.mol2vec, "mol2vec embeddings (JSON Lines)");
  app->add_option("--smilesbert", o.smilesbert, "smilesbert embeddings (JSON Lines)");
  app->add_option("--profiles", o.profiles, "Clinical profiles (JSON Lines)");
  app->add_option("--pairs", o.pairs, "Interaction pairs CSV (drug_a,drug_b,documented)");
  app->add_option("--scaffolds", o.scaffolds, "Scaffold CSV (drug_id,scaffold)");
  app->add_option("--out", o.out, "Output directory");
  app->add_option("--lambda1", o.lambda1, "Fusion weight of mol2vec");
  app->add_option("--tau-se", o.tau_se, "Side-effect similarity threshold");
  app->add_option("--tau-neg", o.tau_neg, "Reliable-negative side-effect threshold");
  app->add_option("--protocol", o.protocol, "Split protocol: random | cold_start | scaffold");
  app->add_option("--split-seed", o.split_seed, "Split seed");
  app->add_option("--budget", o.budget, "Optimizer budget: full | smoke");
  app->add_option("--heuristic", o.heuristic, "ACO heuristic: uniform | mean_fitness");
  app->add_option("--seeds", o.seeds, "Optimizer seeds")->delimiter(',');
  app->add_option("--max-epochs", o.max_epochs, "Training epoch cap");
  app->add_option("--threshold", o.threshold, "Decision threshold");
  app->add_option("--resamples", o.resamples, "Bootstrap resamples");
  app->add_option("--workers", o.workers, "Worker threads (default: all cores)");
  app->add_flag("--no-rbscore", o.no_rbscore, "Drop the clinical score feature");
  app->add_flag("--materialize", o.materialize, "Precompute feature rows");
  app->add_flag("--search-lambda1", o.search_lambda1, "Add lambda1 to the searched dimensions");
}

cli::RunConfig resolve(const Overrides& o) {
  cli::RunConfig c;
  c.workers = default_workers();
  if (o.config_file) c = cli::load_run_config(*o.config_file, c);
  if (o.drugs) c.paths.drugs = *o.drugs;
  if (o.mol2vec) c.paths.mol2vec = *o.mol2vec;
  if (o.smilesbert) c.paths.smilesbert = *o.smilesbert;
  if (o.profiles) c.paths.profiles = *o.profiles;
  if (o.pairs) c.paths.pairs = *o.pairs;
  if (o.scaffolds) c.paths.scaffolds = *o.scaffolds;
  if (o.out) c.paths.output_dir = *o.out;
  if (o.lambda1) c.lambda1 = *o.lambda1;
  if (o.tau_se) c.tau_se = *o.tau_se;
  if (o.tau_neg) c.tau_neg = *o.tau_neg;
  if (o.protocol) c.protocol = corpus::parse_protocol(*o.protocol);
  if (o.split_seed) c.split_seed = *o.split_seed;
  if (o.budget) c.budget = cli::parse_budget(*o.budget);
  if (o.heuristic) {
    c = cli::config_from_json({{"optimizer", {{"heuristic", *o.heuristic}}}}, {}, c);
  }
  if (o.seeds) c.seeds = *o.seeds;
  if (o.max_epochs) c.mlp.max_epochs = *o.max_epochs;
  if (o.threshold) c.threshold = *o.threshold;
  if (o.resamples) c.bootstrap_resamples = *o.resamples;
  if (o.workers) c.workers = *o.workers;
  if (o.no_rbscore) c.include_rbscore = false;
  if (o.materialize) c.materialize = true;
  if (o.search_lambda1) c.search_lambda1 = true;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_logger_mt("ddi");
  logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e level=%l %v");
  spdlog::set_default_logger(logger);

  CLI::App app{"Drug-drug interaction prediction pipeline"};
  app.set_version_flag("--version", cli::version());
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace | debug | info | warn | error | off");

  Overrides o;
  auto* prepare = app.add_subcommand("prepare", "PU labels and train/validation/test split");
  auto* optimize = app.add_subcommand("optimize", "Hyperparameter search (random, ACO, PSO)");
  auto* train = app.add_subcommand("train", "Train the classifier");
  auto* evaluate = app.add_subcommand("evaluate", "Metric report with bootstrap CIs");
  auto* predict = app.add_subcommand("predict", "Score a pairs file");
  auto* rank = app.add_subcommand("rank", "Top-k candidate interactions");
  auto* rbscore = app.add_subcommand("rbscore", "Clinical rule score tools");
  auto* explain = rbscore->add_subcommand("explain", "Rule breakdown for one pair");
  auto* features = app.add_subcommand("features", "Feature tools");
  auto* dump = features->add_subcommand("dump", "Write pair feature vectors as CSV");
  auto* synth = app.add_subcommand("synth", "Write a synthetic benchmark corpus");
  rbscore->require_subcommand(1);
  features->require_subcommand(1);
  for (auto* sub : {prepare, optimize, train, evaluate, predict, rank, explain, dump}) add_common(sub, o);

  std::optional<std::string> mlp_config;
  train->add_option("--mlp-config", mlp_config, "MLP config JSON (default: best_config.json if present)");
  std::string split = "test";
  bool curves = false;
  evaluate->add_option("--split", split, "train | validation | test");
  evaluate->add_flag("--curves", curves, "Also write ROC/PR curve CSVs");
  std::string query;
  std::optional<std::string> output;
  predict->add_option("--query", query, "CSV with drug_a,drug_b")->required();
  predict->add_option("--output", output, "Output CSV (default <out>/predictions.csv)");
  std::optional<std::size_t> k;
  std::optional<std::string> rank_query;
  rank->add_option("--k", k, "Number of pairs to report (default from config, 20)");
  rank->add_option("--query", rank_query, "Candidate pairs CSV (default: unlabeled dataset pairs)");
  std::string pair;
  explain->add_option("--pair", pair, "DRUG_A,DRUG_B")->required();
  std::optional<std::string> dump_query, dump_output;
  dump->add_option("--query", dump_query, "Pairs CSV (default: every dataset pair)");
  dump->add_option("--output", dump_output, "Output CSV (default <out>/features.csv)");
  synthetic::Options so;
  std::string synth_dir = "synthetic";
  synth->add_option("--dir", synth_dir, "Output directory");
  synth->add_option("--seed", so.seed, "Generator seed");
  synth->add_option("--n-drugs", so.drugs, "Number of drugs");
  synth->add_option("--n-pairs", so.candidate_pairs, "Number of candidate pairs");
  synth->add_option("--dim", so.dim, "Embedding dimension");
  synth->add_option("--label-noise", so.label_noise, "Fraction of interactions left undocumented");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitValidation;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (synth->parsed()) {
      const auto s = synthetic::generate(so, synth_dir);
      std::printf("wrote %s: %zu pairs, %zu true interactions, %zu documented\n", synth_dir.c_str(),
                  s.pairs, s.true_interactions, s.documented);
      return cli::kExitOk;
    }
    const cli::RunConfig c = resolve(o);
    if (prepare->parsed()) {
      std::cout << cli::cmd_prepare(c).dump(2) << '\n';
    } else if (optimize->parsed()) {
      const auto summary = cli::cmd_optimize(c);
      std::printf("%-6s %-10s %s\n", "seed", "val AUC", "config");
      for (const auto& s : summary["seeds"]) {
        std::printf("%-6llu %-10.4f %s\n", static_cast<unsigned long long>(s["seed"].get<std::uint64_t>()),
                    s["best_fitness"].get<double>(), s["best_config"].dump().c_str());
      }
      std::printf("best: seed %llu, val AUC %.4f\n",
                  static_cast<unsigned long long>(summary["best_seed"].get<std::uint64_t>()),
                  summary["best_fitness"].get<double>());
    } else if (train->parsed()) {
      std::optional<fs::path> file;
      if (mlp_config) file = *mlp_config;
      std::cout << cli::cmd_train(c, file).dump(2) << '\n';
    } else if (evaluate->parsed()) {
      std::cout << eval::to_table(cli::cmd_evaluate(c, split, curves));
    } else if (predict->parsed()) {
      const fs::path out = output ? fs::path(*output) : c.paths.output_dir / "predictions.csv";
      const std::size_t failed = cli::cmd_predict(c, query, out);
      std::printf("wrote %s (%zu failed rows)\n", out.string().c_str(), failed);
      if (failed > 0) return cli::kExitValidation;
    } else if (rank->parsed()) {
      std::optional<fs::path> file;
      if (rank_query) file = *rank_query;
      const auto top = cli::cmd_rank(c, k.value_or(c.top_k), file);
      std::printf("%-5s %-16s %-16s %s\n", "rank", "drug_a", "drug_b", "probability");
      for (std::size_t i = 0; i < top.size(); ++i) {
        std::printf("%-5zu %-16s %-16s %.4f\n", i + 1, top[i].drug_a.c_str(), top[i].drug_b.c_str(),
                    top[i].probability);
      }
    } else if (explain->parsed()) {
      const auto comma = pair.find(',');
      if (comma == std::string::npos) throw ValidationError("--pair expects DRUG_A,DRUG_B");
      std::cout << cli::cmd_rbscore_explain(c, pair.substr(0, comma), pair.substr(comma + 1)).dump(2)
                << '\n';
    } else if (dump->parsed()) {
      std::optional<fs::path> file;
      if (dump_query) file = *dump_query;
      const fs::path out = dump_output ? fs::path(*dump_output) : c.paths.output_dir / "features.csv";
      cli::cmd_features_dump(c, file, out);
      std::printf("wrote %s\n", out.string().c_str());
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return cli::exit_code_for(e);
  }
  return cli::kExitOk;
}

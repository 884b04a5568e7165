#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ddi::synthetic {

// Planted-truth benchmark: drugs sit in latent clusters; a pair interacts iff
// the drugs share an enzyme or their fused embeddings have cosine > 0.8.
// A fraction of true interactions is left undocumented (label noise), which
// is the only kind of noise a positive-unlabeled corpus can carry.
struct Options {
  std::size_t drugs = 200;
  std::size_t clusters = 20;
  std::size_t dim = 16;
  std::size_t candidate_pairs = 2400;
  double same_cluster_fraction = 0.35;
  double label_noise = 0.15;
  double cosine_threshold = 0.8;
  double within_cluster_spread = 0.35;
  double source_noise = 0.1;
  std::size_t enzyme_vocab = 8;
  std::size_t target_vocab = 300;
  std::size_t side_effect_vocab = 300;
  std::size_t atc_classes = 40;
  // Probability that a drug takes its cluster's ATC class, therapeutic group
  // and one of its cluster's targets; similar structures share pharmacology.
  double cluster_affinity = 0.8;
  std::size_t targets_per_cluster = 4;
  std::size_t therapeutic_groups = 25;
  double pk_modulator_rate = 0.01;
  std::size_t scaffolds_per_cluster = 2;
  std::uint64_t seed = 7;
};

struct Paths {
  std::filesystem::path drugs;
  std::filesystem::path mol2vec;
  std::filesystem::path smilesbert;
  std::filesystem::path profiles;
  std::filesystem::path pairs;
  std::filesystem::path scaffolds;
};

struct Summary {
  Paths paths;
  std::size_t pairs = 0;
  std::size_t true_interactions = 0;
  std::size_t documented = 0;
};

// Standard file names inside `dir`.
Paths paths_in(const std::filesystem::path& dir);

// Writes drugs.csv, mol2vec.jsonl, smilesbert.jsonl, profiles.jsonl,
// pairs.csv and scaffolds.csv into `dir` (created if missing).
Summary generate(const Options& options, const std::filesystem::path& dir);

}  // namespace ddi::synthetic

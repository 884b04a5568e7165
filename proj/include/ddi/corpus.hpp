#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddi/profile.hpp"

namespace ddi::corpus {

inline constexpr std::string_view kMol2Vec = "mol2vec";
inline constexpr std::string_view kSmilesBert = "smilesbert";
inline constexpr double kDefaultTauNeg = 0.1;

struct DrugRecord {
  std::string drug_id;
  std::string smiles;
  // Keyed by source tag ("mol2vec" or "smilesbert").
  std::map<std::string, std::vector<double>, std::less<>> embeddings;
  ClinicalProfile profile;
};

// Drugs keyed by id. Enforces unique ids and one embedding dimension per
// source tag. Immutable once loading finishes.
class DrugCatalog {
 public:
  using Map = std::map<std::string, DrugRecord, std::less<>>;

  // Throws ValidationError on an empty or duplicate id, or when an embedding
  // disagrees with the dimension already recorded for its source.
  void add(DrugRecord record);

  // Attaches (or replaces) one embedding; same checks as add().
  void set_embedding(std::string_view drug_id, std::string_view source,
                     std::vector<double> vector);

  const DrugRecord* find(std::string_view drug_id) const;
  // Throws ValidationError("unknown drug_id ...") when absent.
  const DrugRecord& at(std::string_view drug_id) const;
  DrugRecord& mutable_at(std::string_view drug_id);
  bool contains(std::string_view drug_id) const { return find(drug_id) != nullptr; }

  std::size_t size() const { return drugs_.size(); }
  bool empty() const { return drugs_.empty(); }

  // Embedding dimension for a source tag, 0 when the tag is unused.
  std::size_t dimension(std::string_view source) const;
  std::vector<std::string> sources() const;

  Map::const_iterator begin() const { return drugs_.begin(); }
  Map::const_iterator end() const { return drugs_.end(); }

 private:
  void check_dimension(std::string_view source, std::size_t dim) const;

  Map drugs_;
  std::map<std::string, std::size_t, std::less<>> dims_;
};

// Reads the drug CSV, every embedding JSON Lines file and the profile JSON
// Lines file. Every drug must end up with a profile and with a vector for
// every source tag seen in the embedding files.
DrugCatalog load_catalog(const std::filesystem::path& drug_file,
                         std::span<const std::filesystem::path> embedding_files,
                         const std::filesystem::path& profile_file);

// Merges a `drug_id,scaffold` CSV into the profiles. Empty scaffold cells
// (molecules without a ring system) leave scaffold_id unset.
void merge_scaffolds(DrugCatalog& catalog, const std::filesystem::path& scaffold_file);

enum class PairLabel { Positive, ReliableNegative, Unknown };

std::string_view to_string(PairLabel label);
PairLabel parse_label(std::string_view text);

struct RawPair {
  std::string drug_a;
  std::string drug_b;
  bool documented = false;
};

// An unordered pair stored with the lexicographically smaller id first.
struct PairInstance {
  std::string drug_a;
  std::string drug_b;
  PairLabel label = PairLabel::Unknown;

  // "drug_a|drug_b"; total order used for tie-breaking.
  std::string key() const { return drug_a + "|" + drug_b; }

  bool operator==(const PairInstance&) const = default;
};

// Orders ids canonically; throws ValidationError on a self-pair.
std::pair<std::string, std::string> canonical_pair(std::string_view a, std::string_view b);

// Reads `drug_a,drug_b,documented` with documented in {0, 1}.
std::vector<RawPair> load_pairs(const std::filesystem::path& pairs_file);

// Documented pairs become Positive. An undocumented pair becomes
// ReliableNegative only when the drugs share no enzyme, no target, no ATC
// level-3 class, and their side-effect Jaccard is below tau_neg; otherwise
// Unknown. Input pairs are canonicalized and de-duplicated (a pair is
// documented if any of its copies is). Output is sorted by key().
std::vector<PairInstance> assign_pu_labels(std::span<const RawPair> raw_pairs,
                                           const DrugCatalog& catalog,
                                           double tau_neg = kDefaultTauNeg);

enum class SplitProtocol { Random, ColdStart, Scaffold };

std::string_view to_string(SplitProtocol protocol);
SplitProtocol parse_protocol(std::string_view text);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct DataSplit {
  std::vector<PairInstance> train;
  std::vector<PairInstance> validation;
  std::vector<PairInstance> test;
  SplitProtocol protocol = SplitProtocol::Random;
  std::uint64_t seed = 0;
  // Pairs whose drugs (or scaffolds) landed in different partitions.
  std::size_t dropped = 0;
};

// Splits n items into three counts that sum to n exactly; leftover units go
// to the largest fractional parts, earlier partitions winning ties.
std::array<std::size_t, 3> largest_remainder(std::size_t n, const SplitRatios& ratios);

void validate_ratios(const SplitRatios& ratios);

// Random shuffles pairs. ColdStart partitions drug ids and Scaffold partitions
// scaffold ids (catalog required); a pair is kept only when both drugs fall in
// the same partition. Deterministic given the seed and the set of pairs.
DataSplit split_dataset(std::span<const PairInstance> pairs, SplitProtocol protocol,
                        const SplitRatios& ratios, std::uint64_t seed,
                        const DrugCatalog* catalog = nullptr);

struct ClassWeights {
  double positive = 1.0;
  double negative = 1.0;
};

// Inverse-frequency weights normalized so the negative weight is 1.
ClassWeights class_weights(std::span<const PairInstance> train_pairs);

}  // namespace ddi::corpus

#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddi/corpus.hpp"
#include "ddi/rbscore.hpp"

namespace ddi::features {

inline constexpr double kDefaultLambda1 = 0.5;

// lambda1 * e1 + (1 - lambda1) * e2. Throws ValidationError on a dimension
// mismatch or lambda1 outside [0, 1].
std::vector<double> fuse(std::span<const double> e1, std::span<const double> e2, double lambda1);

// Writes the 4d pairwise block [|ei - ej| , ei * ej , (ei - ej)^2 , (ei + ej) / 2]
// into out (size 4d). Every block is symmetric in (ei, ej), bit for bit.
void pair_features(std::span<const double> ei, std::span<const double> ej, std::span<double> out);
std::vector<double> pair_features(std::span<const double> ei, std::span<const double> ej);

// Appends the clinical score; s_clinical must lie in [0, 1].
std::vector<double> assemble_input(std::span<const double> pair_feat, double s_clinical);

// Index of the first element of each block for embedding dimension d.
struct BlockLayout {
  std::size_t abs_diff;
  std::size_t hadamard;
  std::size_t sq_diff;
  std::size_t mean;
  std::size_t clinical;  // == 4d
};
constexpr BlockLayout layout_for(std::size_t d) { return {0, d, 2 * d, 3 * d, 4 * d}; }

struct FeatureOptions {
  double lambda1 = kDefaultLambda1;
  double tau_se = rbscore::kDefaultTauSe;
  // When false the clinical score column is omitted (4d inputs). Used for
  // the RBScore ablation.
  bool include_rbscore = true;
};

// Feature callback consumed by the classifier: fills `out` for one pair.
using FeatureFn = std::function<void(const corpus::PairInstance&, std::span<double>)>;

// Fuses every drug's two embeddings once and evaluates pair vectors lazily.
// Requires both "mol2vec" and "smilesbert" embeddings of equal dimension.
class PairFeaturizer {
 public:
  PairFeaturizer(const corpus::DrugCatalog& catalog, FeatureOptions options);

  std::size_t embedding_dim() const { return dim_; }
  std::size_t input_dim() const { return 4 * dim_ + (options_.include_rbscore ? 1 : 0); }
  const FeatureOptions& options() const { return options_; }

  const std::vector<double>& fused(std::string_view drug_id) const;
  double clinical_score(std::string_view a, std::string_view b) const;

  // Throws ValidationError("unknown drug_id ...") for drugs outside the catalog.
  void compute(std::string_view a, std::string_view b, std::span<double> out) const;
  std::vector<double> compute(std::string_view a, std::string_view b) const;

  // Callback evaluating features on demand.
  FeatureFn lazy() const;
  // Callback backed by rows precomputed for `pairs`; falls back to lazy
  // evaluation for pairs outside that set.
  FeatureFn materialize(std::span<const corpus::PairInstance> pairs) const;

 private:
  const corpus::DrugCatalog* catalog_;
  FeatureOptions options_;
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>, std::less<>> fused_;
};

}  // namespace ddi::features

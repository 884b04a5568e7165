#include "ddi/features.hpp"

#include <cmath>
#include <memory>
#include <unordered_map>

#include "ddi/error.hpp"

namespace ddi::features {

std::vector<double> fuse(std::span<const double> e1, std::span<const double> e2, double lambda1) {
  if (e1.size() != e2.size()) {
    throw ValidationError("fuse: dimension mismatch (" + std::to_string(e1.size()) + " vs " +
                          std::to_string(e2.size()) + ")");
  }
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) throw ValidationError("fuse: lambda1 must lie in [0, 1]");
  const double lambda2 = 1.0 - lambda1;
  std::vector<double> out(e1.size());
  for (std::size_t k = 0; k < e1.size(); ++k) out[k] = lambda1 * e1[k] + lambda2 * e2[k];
  return out;
}

void pair_features(std::span<const double> ei, std::span<const double> ej, std::span<double> out) {
  const std::size_t d = ei.size();
  if (ej.size() != d) {
    throw ValidationError("pair_features: dimension mismatch (" + std::to_string(d) + " vs " +
                          std::to_string(ej.size()) + ")");
  }
  if (out.size() < 4 * d) throw ValidationError("pair_features: output buffer too small");
  const BlockLayout at = layout_for(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = ei[k] - ej[k];
    out[at.abs_diff + k] = std::abs(diff);
    out[at.hadamard + k] = ei[k] * ej[k];
    out[at.sq_diff + k] = diff * diff;
    out[at.mean + k] = (ei[k] + ej[k]) * 0.5;
  }
}

std::vector<double> pair_features(std::span<const double> ei, std::span<const double> ej) {
  std::vector<double> out(4 * ei.size());
  pair_features(ei, ej, out);
  return out;
}

std::vector<double> assemble_input(std::span<const double> pair_feat, double s_clinical) {
  if (!(s_clinical >= 0.0 && s_clinical <= 1.0)) {
    throw ValidationError("assemble_input: s_clinical must lie in [0, 1]");
  }
  std::vector<double> out(pair_feat.begin(), pair_feat.end());
  out.push_back(s_clinical);
  return out;
}

PairFeaturizer::PairFeaturizer(const corpus::DrugCatalog& catalog, FeatureOptions options)
    : catalog_(&catalog), options_(options) {
  if (!(options_.lambda1 >= 0.0 && options_.lambda1 <= 1.0)) {
    throw ValidationError("lambda1 must lie in [0, 1]");
  }
  if (!(options_.tau_se >= 0.0 && options_.tau_se <= 1.0)) {
    throw ValidationError("tau_se must lie in [0, 1]");
  }
  const std::size_t d1 = catalog.dimension(corpus::kMol2Vec);
  const std::size_t d2 = catalog.dimension(corpus::kSmilesBert);
  if (d1 == 0 || d2 == 0) {
    throw ValidationError("feature construction needs both mol2vec and smilesbert embeddings");
  }
  if (d1 != d2) {
    throw ValidationError("embedding dimension mismatch: mol2vec " + std::to_string(d1) +
                          " vs smilesbert " + std::to_string(d2) +
                          " (reduce both sources to a common dimension first)");
  }
  dim_ = d1;
  for (const auto& [id, record] : catalog) {
    auto m = record.embeddings.find(corpus::kMol2Vec);
    auto s = record.embeddings.find(corpus::kSmilesBert);
    if (m == record.embeddings.end() || s == record.embeddings.end()) {
      throw ValidationError("drug '" + id + "' lacks one of the embedding sources");
    }
    fused_.emplace(id, fuse(m->second, s->second, options_.lambda1));
  }
}

const std::vector<double>& PairFeaturizer::fused(std::string_view drug_id) const {
  auto it = fused_.find(drug_id);
  if (it == fused_.end()) throw ValidationError("unknown drug_id '" + std::string(drug_id) + "'");
  return it->second;
}

double PairFeaturizer::clinical_score(std::string_view a, std::string_view b) const {
  return rbscore::score_pair(catalog_->at(a).profile, catalog_->at(b).profile, options_.tau_se)
      .normalized;
}

void PairFeaturizer::compute(std::string_view a, std::string_view b, std::span<double> out) const {
  if (out.size() != input_dim()) throw ValidationError("feature buffer has the wrong size");
  pair_features(fused(a), fused(b), out.first(4 * dim_));
  if (options_.include_rbscore) out[4 * dim_] = clinical_score(a, b);
}

std::vector<double> PairFeaturizer::compute(std::string_view a, std::string_view b) const {
  std::vector<double> out(input_dim());
  compute(a, b, out);
  return out;
}

FeatureFn PairFeaturizer::lazy() const {
  return [this](const corpus::PairInstance& p, std::span<double> out) {
    compute(p.drug_a, p.drug_b, out);
  };
}

FeatureFn PairFeaturizer::materialize(std::span<const corpus::PairInstance> pairs) const {
  struct Table {
    std::size_t dim;
    std::vector<double> rows;
    std::unordered_map<std::string, std::size_t> index;
  };
  auto table = std::make_shared<Table>();
  table->dim = input_dim();
  table->rows.resize(pairs.size() * table->dim);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto [it, inserted] = table->index.emplace(pairs[i].key(), i);
    if (!inserted) continue;
    compute(pairs[i].drug_a, pairs[i].drug_b,
            std::span<double>(table->rows).subspan(i * table->dim, table->dim));
  }
  return [this, table](const corpus::PairInstance& p, std::span<double> out) {
    auto it = table->index.find(p.key());
    if (it == table->index.end()) {
      compute(p.drug_a, p.drug_b, out);
      return;
    }
    const double* row = table->rows.data() + it->second * table->dim;
    std::copy(row, row + table->dim, out.begin());
  };
}

}  // namespace ddi::features

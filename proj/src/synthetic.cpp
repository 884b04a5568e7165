#include "ddi/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "ddi/error.hpp"
#include "ddi/features.hpp"
#include "ddi/random.hpp"
#include "json.hpp"

namespace ddi::synthetic {

namespace {

struct Drug {
  std::string id;
  std::size_t cluster = 0;
  std::vector<double> mol2vec;
  std::vector<double> smilesbert;
  std::vector<double> fused;
  std::set<std::string> enzymes, targets, atc, groups, side_effects;
  bool pk_modulator = false;
  std::string scaffold;
};

std::string padded(const char* prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

std::set<std::string> draw_tokens(Rng& rng, const char* prefix, std::size_t vocab,
                                  std::size_t lo, std::size_t hi) {
  const std::size_t k = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
  std::set<std::string> out;
  while (out.size() < std::min(k, vocab)) {
    out.insert(padded(prefix, static_cast<std::size_t>(rng.below(vocab)), 3));
  }
  return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

bool shares(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& t : a) {
    if (b.contains(t)) return true;
  }
  return false;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  return out;
}

nlohmann::json token_array(const std::set<std::string>& tokens) {
  return nlohmann::json(std::vector<std::string>(tokens.begin(), tokens.end()));
}

}  // namespace

Paths paths_in(const std::filesystem::path& dir) {
  return {dir / "drugs.csv",     dir / "mol2vec.jsonl", dir / "smilesbert.jsonl",
          dir / "profiles.jsonl", dir / "pairs.csv",     dir / "scaffolds.csv"};
}

Summary generate(const Options& o, const std::filesystem::path& dir) {
  if (o.drugs < 2 || o.clusters < 1 || o.dim < 1) {
    throw ValidationError("synthetic: need at least 2 drugs, 1 cluster and dimension 1");
  }
  if (!(o.label_noise >= 0.0 && o.label_noise < 1.0)) {
    throw ValidationError("synthetic: label_noise must lie in [0, 1)");
  }
  Rng rng(o.seed);

  std::vector<std::vector<double>> centres(o.clusters, std::vector<double>(o.dim));
  for (auto& c : centres) {
    for (double& x : c) x = rng.normal();
  }

  std::vector<Drug> drugs(o.drugs);
  std::vector<std::vector<std::size_t>> members(o.clusters);
  for (std::size_t i = 0; i < o.drugs; ++i) {
    Drug& d = drugs[i];
    d.id = padded("DB", i + 1, 5);
    d.cluster = i % o.clusters;
    members[d.cluster].push_back(i);
    std::vector<double> latent(o.dim);
    for (std::size_t k = 0; k < o.dim; ++k) {
      latent[k] = centres[d.cluster][k] + rng.normal(0.0, o.within_cluster_spread);
    }
    d.mol2vec.resize(o.dim);
    d.smilesbert.resize(o.dim);
    for (std::size_t k = 0; k < o.dim; ++k) {
      d.mol2vec[k] = latent[k] + rng.normal(0.0, o.source_noise);
      d.smilesbert[k] = latent[k] + rng.normal(0.0, o.source_noise);
    }
    d.fused = features::fuse(d.mol2vec, d.smilesbert, features::kDefaultLambda1);

    d.enzymes = draw_tokens(rng, "CYP", o.enzyme_vocab, 0, 2);
    d.targets = draw_tokens(rng, "T", o.target_vocab, 0, 2);
    if (rng.bernoulli(o.cluster_affinity)) {
      d.targets.insert(padded("T", (d.cluster * o.targets_per_cluster +
                                    rng.below(o.targets_per_cluster)) % o.target_vocab, 3));
    }
    d.side_effects = draw_tokens(rng, "SE", o.side_effect_vocab, 5, 10);
    d.groups.insert(padded("G", rng.bernoulli(o.cluster_affinity)
                                    ? d.cluster % o.therapeutic_groups
                                    : static_cast<std::size_t>(rng.below(o.therapeutic_groups)),
                           3));
    const std::size_t atc_class = rng.bernoulli(o.cluster_affinity)
                                      ? d.cluster % o.atc_classes
                                      : static_cast<std::size_t>(rng.below(o.atc_classes));
    const char letter = static_cast<char>('A' + atc_class % 14);
    std::string code = std::string(1, letter) + padded("", 1 + atc_class / 14, 2) +
                       static_cast<char>('A' + atc_class % 5) +
                       static_cast<char>('A' + rng.below(5)) + padded("", 1 + rng.below(9), 2);
    d.atc.insert(code);
    d.pk_modulator = rng.bernoulli(o.pk_modulator_rate);
    d.scaffold = "SCF" + std::to_string(d.cluster) + "_" +
                 std::to_string(rng.below(std::max<std::size_t>(o.scaffolds_per_cluster, 1)));
  }

  // Candidate pairs: a mix of within-cluster and uniformly random pairs.
  std::set<std::pair<std::size_t, std::size_t>> chosen;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t max_pairs = o.drugs * (o.drugs - 1) / 2;
  const std::size_t target = std::min(o.candidate_pairs, max_pairs);
  std::size_t attempts = 0;
  while (pairs.size() < target && attempts < 100 * target) {
    ++attempts;
    std::size_t a = 0, b = 0;
    if (rng.bernoulli(o.same_cluster_fraction)) {
      const auto& m = members[rng.below(o.clusters)];
      if (m.size() < 2) continue;
      a = m[rng.below(m.size())];
      b = m[rng.below(m.size())];
    } else {
      a = static_cast<std::size_t>(rng.below(o.drugs));
      b = static_cast<std::size_t>(rng.below(o.drugs));
    }
    if (a == b) continue;
    if (b < a) std::swap(a, b);
    if (chosen.emplace(a, b).second) pairs.emplace_back(a, b);
  }

  std::filesystem::create_directories(dir);
  Summary summary;
  summary.paths = paths_in(dir);
  {
    auto out = open_output(summary.paths.drugs);
    out << "drug_id,smiles\n";
    for (std::size_t i = 0; i < drugs.size(); ++i) {
      out << drugs[i].id << ',' << std::string(1 + i % 6, 'C') << "O\n";
    }
  }
  {
    auto m = open_output(summary.paths.mol2vec);
    auto s = open_output(summary.paths.smilesbert);
    for (const auto& d : drugs) {
      m << nlohmann::json{{"drug_id", d.id}, {"source", "mol2vec"}, {"vector", d.mol2vec}}.dump() << '\n';
      s << nlohmann::json{{"drug_id", d.id}, {"source", "smilesbert"}, {"vector", d.smilesbert}}.dump()
        << '\n';
    }
  }
  {
    auto out = open_output(summary.paths.profiles);
    for (const auto& d : drugs) {
      nlohmann::json j{{"drug_id", d.id},
                       {"enzymes", token_array(d.enzymes)},
                       {"targets", token_array(d.targets)},
                       {"atc", token_array(d.atc)},
                       {"groups", token_array(d.groups)},
                       {"side_effects", token_array(d.side_effects)},
                       {"strong_pk_modulator", d.pk_modulator}};
      out << j.dump() << '\n';
    }
  }
  {
    auto out = open_output(summary.paths.scaffolds);
    out << "drug_id,scaffold\n";
    for (const auto& d : drugs) out << d.id << ',' << d.scaffold << '\n';
  }
  {
    auto out = open_output(summary.paths.pairs);
    out << "drug_a,drug_b,documented\n";
    for (const auto& [a, b] : pairs) {
      const Drug& da = drugs[a];
      const Drug& db = drugs[b];
      const bool interacts =
          shares(da.enzymes, db.enzymes) || cosine(da.fused, db.fused) > o.cosine_threshold;
      const bool documented = interacts && !rng.bernoulli(o.label_noise);
      summary.true_interactions += interacts ? 1 : 0;
      summary.documented += documented ? 1 : 0;
      out << da.id << ',' << db.id << ',' << (documented ? 1 : 0) << '\n';
    }
  }
  summary.pairs = pairs.size();
  return summary;
}

}  // namespace ddi::synthetic

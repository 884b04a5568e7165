#include "ddi/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "ddi/csv.hpp"
#include "ddi/error.hpp"
#include "ddi/random.hpp"
#include "ddi/rbscore.hpp"
#include "json.hpp"

namespace ddi::corpus {

using nlohmann::json;

namespace {

std::string normalize_token(std::string_view token) {
  std::string out(csv::trim(token));
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::set<std::string> read_token_set(const json& obj, const char* key,
                                     const std::string& file, std::size_t line) {
  std::set<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError(file, line, std::string("field '") + key + "' must be an array");
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw ParseError(file, line, std::string("field '") + key + "' must contain strings");
    }
    std::string token = normalize_token(v.get<std::string>());
    if (!token.empty()) out.insert(std::move(token));
  }
  return out;
}

void load_drug_file(const std::filesystem::path& path, DrugCatalog& catalog) {
  auto in = open_input(path);
  const std::string file = path.string();
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = csv::chomp(line);
    if (csv::trim(view).empty()) continue;
    auto fields = csv::split_line(view);
    if (!header_seen) {
      header_seen = true;
      if (fields.empty() || csv::trim(fields[0]) != "drug_id") {
        throw ParseError(file, lineno, "expected header 'drug_id,smiles'");
      }
      continue;
    }
    if (fields.size() > 2) throw ParseError(file, lineno, "malformed line: expected drug_id,smiles");
    DrugRecord record;
    record.drug_id = std::string(csv::trim(fields[0]));
    if (fields.size() == 2) record.smiles = std::string(csv::trim(fields[1]));
    if (record.drug_id.empty()) throw ParseError(file, lineno, "malformed line: empty drug_id");
    if (catalog.contains(record.drug_id)) {
      throw ParseError(file, lineno, "duplicate drug_id '" + record.drug_id + "'");
    }
    catalog.add(std::move(record));
  }
  if (!header_seen) throw ParseError(file, 1, "empty drug file");
}

json parse_json_line(std::string_view text, const std::string& file, std::size_t lineno) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(file, lineno, std::string("malformed line: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(file, lineno, "malformed line: expected a JSON object");
  auto id = obj.find("drug_id");
  if (id == obj.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw ParseError(file, lineno, "malformed line: missing drug_id");
  }
  return obj;
}

void load_embedding_file(const std::filesystem::path& path, DrugCatalog& catalog,
                         std::set<std::pair<std::string, std::string>>& seen) {
  auto in = open_input(path);
  const std::string file = path.string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = csv::chomp(line);
    if (csv::trim(view).empty()) continue;
    json obj = parse_json_line(view, file, lineno);
    const std::string drug_id = obj["drug_id"].get<std::string>();
    auto source_it = obj.find("source");
    if (source_it == obj.end() || !source_it->is_string()) {
      throw ParseError(file, lineno, "malformed line: missing source");
    }
    const std::string source = source_it->get<std::string>();
    if (source != kMol2Vec && source != kSmilesBert) {
      throw ParseError(file, lineno, "unknown embedding source '" + source + "'");
    }
    auto vec_it = obj.find("vector");
    if (vec_it == obj.end() || !vec_it->is_array() || vec_it->empty()) {
      throw ParseError(file, lineno, "malformed line: 'vector' must be a non-empty array");
    }
    std::vector<double> vector;
    vector.reserve(vec_it->size());
    for (const auto& v : *vec_it) {
      if (!v.is_number()) throw ParseError(file, lineno, "malformed line: non-numeric vector element");
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw ParseError(file, lineno, "non-finite vector element");
      vector.push_back(x);
    }
    if (!catalog.contains(drug_id)) {
      throw ParseError(file, lineno, "unknown drug_id '" + drug_id + "'");
    }
    if (!seen.emplace(drug_id, source).second) {
      throw ParseError(file, lineno, "duplicate " + source + " embedding for '" + drug_id + "'");
    }
    const std::size_t expected = catalog.dimension(source);
    if (expected != 0 && expected != vector.size()) {
      throw ParseError(file, lineno,
                       "dimension mismatch for source " + source + ": expected " +
                           std::to_string(expected) + ", got " + std::to_string(vector.size()));
    }
    catalog.set_embedding(drug_id, source, std::move(vector));
  }
}

void load_profile_file(const std::filesystem::path& path, DrugCatalog& catalog,
                       std::set<std::string>& seen) {
  auto in = open_input(path);
  const std::string file = path.string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = csv::chomp(line);
    if (csv::trim(view).empty()) continue;
    json obj = parse_json_line(view, file, lineno);
    const std::string drug_id = obj["drug_id"].get<std::string>();
    if (!catalog.contains(drug_id)) throw ParseError(file, lineno, "unknown drug_id '" + drug_id + "'");
    if (!seen.insert(drug_id).second) {
      throw ParseError(file, lineno, "duplicate profile for '" + drug_id + "'");
    }
    ClinicalProfile profile;
    profile.enzymes = read_token_set(obj, "enzymes", file, lineno);
    profile.targets = read_token_set(obj, "targets", file, lineno);
    profile.atc_codes = read_token_set(obj, "atc", file, lineno);
    profile.therapeutic_groups = read_token_set(obj, "groups", file, lineno);
    profile.side_effects = read_token_set(obj, "side_effects", file, lineno);
    if (auto it = obj.find("strong_pk_modulator"); it != obj.end() && !it->is_null()) {
      if (!it->is_boolean()) throw ParseError(file, lineno, "'strong_pk_modulator' must be a boolean");
      profile.strong_pk_modulator = it->get<bool>();
    }
    if (auto it = obj.find("scaffold"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(file, lineno, "'scaffold' must be a string");
      std::string scaffold(csv::trim(it->get<std::string>()));
      if (!scaffold.empty()) profile.scaffold_id = std::move(scaffold);
    }
    catalog.mutable_at(drug_id).profile = std::move(profile);
  }
}

}  // namespace

void DrugCatalog::check_dimension(std::string_view source, std::size_t dim) const {
  if (dim == 0) throw ValidationError("empty embedding vector for source " + std::string(source));
  auto it = dims_.find(source);
  if (it != dims_.end() && it->second != dim) {
    throw ValidationError("dimension mismatch for source " + std::string(source) + ": expected " +
                          std::to_string(it->second) + ", got " + std::to_string(dim));
  }
}

void DrugCatalog::add(DrugRecord record) {
  if (record.drug_id.empty()) throw ValidationError("drug_id must be non-empty");
  if (drugs_.contains(record.drug_id)) {
    throw ValidationError("duplicate drug_id '" + record.drug_id + "'");
  }
  for (const auto& [source, vec] : record.embeddings) check_dimension(source, vec.size());
  for (const auto& [source, vec] : record.embeddings) dims_.emplace(source, vec.size());
  std::string id = record.drug_id;
  drugs_.emplace(std::move(id), std::move(record));
}

void DrugCatalog::set_embedding(std::string_view drug_id, std::string_view source,
                                std::vector<double> vector) {
  DrugRecord& record = mutable_at(drug_id);
  check_dimension(source, vector.size());
  dims_.emplace(std::string(source), vector.size());
  record.embeddings.insert_or_assign(std::string(source), std::move(vector));
}

const DrugRecord* DrugCatalog::find(std::string_view drug_id) const {
  auto it = drugs_.find(drug_id);
  return it == drugs_.end() ? nullptr : &it->second;
}

const DrugRecord& DrugCatalog::at(std::string_view drug_id) const {
  const DrugRecord* r = find(drug_id);
  if (!r) throw ValidationError("unknown drug_id '" + std::string(drug_id) + "'");
  return *r;
}

DrugRecord& DrugCatalog::mutable_at(std::string_view drug_id) {
  auto it = drugs_.find(drug_id);
  if (it == drugs_.end()) throw ValidationError("unknown drug_id '" + std::string(drug_id) + "'");
  return it->second;
}

std::size_t DrugCatalog::dimension(std::string_view source) const {
  auto it = dims_.find(source);
  return it == dims_.end() ? 0 : it->second;
}

std::vector<std::string> DrugCatalog::sources() const {
  std::vector<std::string> out;
  for (const auto& [source, dim] : dims_) out.push_back(source);
  return out;
}

DrugCatalog load_catalog(const std::filesystem::path& drug_file,
                         std::span<const std::filesystem::path> embedding_files,
                         const std::filesystem::path& profile_file) {
  DrugCatalog catalog;
  load_drug_file(drug_file, catalog);

  std::set<std::pair<std::string, std::string>> seen_embeddings;
  for (const auto& path : embedding_files) load_embedding_file(path, catalog, seen_embeddings);

  std::set<std::string> seen_profiles;
  load_profile_file(profile_file, catalog, seen_profiles);

  for (const auto& [id, record] : catalog) {
    if (!seen_profiles.contains(id)) {
      throw ValidationError(profile_file.string() + ": missing profile for drug_id '" + id + "'");
    }
    for (const auto& source : catalog.sources()) {
      if (!record.embeddings.contains(source)) {
        throw ValidationError("missing " + source + " embedding for drug_id '" + id + "'");
      }
    }
  }
  return catalog;
}

void merge_scaffolds(DrugCatalog& catalog, const std::filesystem::path& scaffold_file) {
  auto in = open_input(scaffold_file);
  const std::string file = scaffold_file.string();
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = csv::chomp(line);
    if (csv::trim(view).empty()) continue;
    auto fields = csv::split_line(view);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 2 || csv::trim(fields[0]) != "drug_id" || csv::trim(fields[1]) != "scaffold") {
        throw ParseError(file, lineno, "expected header 'drug_id,scaffold'");
      }
      continue;
    }
    if (fields.size() != 2) throw ParseError(file, lineno, "malformed line: expected drug_id,scaffold");
    const std::string id(csv::trim(fields[0]));
    if (!catalog.contains(id)) throw ParseError(file, lineno, "unknown drug_id '" + id + "'");
    std::string scaffold(csv::trim(fields[1]));
    auto& profile = catalog.mutable_at(id).profile;
    if (scaffold.empty()) {
      profile.scaffold_id.reset();
    } else {
      profile.scaffold_id = std::move(scaffold);
    }
  }
}

std::string_view to_string(PairLabel label) {
  switch (label) {
    case PairLabel::Positive: return "positive";
    case PairLabel::ReliableNegative: return "reliable_negative";
    case PairLabel::Unknown: return "unknown";
  }
  return "unknown";
}

PairLabel parse_label(std::string_view text) {
  if (text == "positive") return PairLabel::Positive;
  if (text == "reliable_negative") return PairLabel::ReliableNegative;
  if (text == "unknown") return PairLabel::Unknown;
  throw ValidationError("unknown pair label '" + std::string(text) + "'");
}

std::pair<std::string, std::string> canonical_pair(std::string_view a, std::string_view b) {
  if (a == b) throw ValidationError("self-pair '" + std::string(a) + "'");
  if (b < a) std::swap(a, b);
  return {std::string(a), std::string(b)};
}

std::vector<RawPair> load_pairs(const std::filesystem::path& pairs_file) {
  auto in = open_input(pairs_file);
  const std::string file = pairs_file.string();
  std::vector<RawPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = csv::chomp(line);
    if (csv::trim(view).empty()) continue;
    auto fields = csv::split_line(view);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 2 || csv::trim(fields[0]) != "drug_a" || csv::trim(fields[1]) != "drug_b") {
        throw ParseError(file, lineno, "expected header 'drug_a,drug_b,documented'");
      }
      continue;
    }
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(file, lineno, "malformed line: expected drug_a,drug_b,documented");
    }
    RawPair p;
    p.drug_a = std::string(csv::trim(fields[0]));
    p.drug_b = std::string(csv::trim(fields[1]));
    if (p.drug_a.empty() || p.drug_b.empty()) throw ParseError(file, lineno, "malformed line: empty drug id");
    const std::string_view flag = fields.size() == 3 ? csv::trim(fields[2]) : std::string_view{};
    if (flag == "1") {
      p.documented = true;
    } else if (flag == "0" || flag.empty()) {
      p.documented = false;
    } else {
      throw ParseError(file, lineno, "malformed line: documented must be 0 or 1");
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<PairInstance> assign_pu_labels(std::span<const RawPair> raw_pairs,
                                           const DrugCatalog& catalog, double tau_neg) {
  if (!(tau_neg >= 0.0 && tau_neg <= 1.0)) {
    throw ValidationError("tau_neg must lie in [0, 1]");
  }
  std::map<std::pair<std::string, std::string>, bool> documented;
  for (const auto& raw : raw_pairs) {
    auto key = canonical_pair(raw.drug_a, raw.drug_b);
    catalog.at(key.first);
    catalog.at(key.second);
    auto [it, inserted] = documented.emplace(std::move(key), raw.documented);
    if (!inserted) it->second = it->second || raw.documented;
  }

  std::vector<PairInstance> out;
  out.reserve(documented.size());
  for (const auto& [key, is_documented] : documented) {
    PairInstance p{key.first, key.second, PairLabel::Unknown};
    if (is_documented) {
      p.label = PairLabel::Positive;
    } else {
      const auto& a = catalog.at(key.first).profile;
      const auto& b = catalog.at(key.second).profile;
      const bool disjoint = !rbscore::intersects(a.enzymes, b.enzymes) &&
                            !rbscore::intersects(a.targets, b.targets) &&
                            rbscore::atc_match(a.atc_codes, b.atc_codes) == 0;
      if (disjoint && rbscore::side_effect_similarity(a.side_effects, b.side_effects) < tau_neg) {
        p.label = PairLabel::ReliableNegative;
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string_view to_string(SplitProtocol protocol) {
  switch (protocol) {
    case SplitProtocol::Random: return "random";
    case SplitProtocol::ColdStart: return "cold_start";
    case SplitProtocol::Scaffold: return "scaffold";
  }
  return "random";
}

SplitProtocol parse_protocol(std::string_view text) {
  if (text == "random") return SplitProtocol::Random;
  if (text == "cold_start" || text == "coldstart" || text == "cold-start") return SplitProtocol::ColdStart;
  if (text == "scaffold") return SplitProtocol::Scaffold;
  throw ValidationError("unknown split protocol '" + std::string(text) + "'");
}

void validate_ratios(const SplitRatios& r) {
  if (!(r.train > 0.0 && r.validation > 0.0 && r.test > 0.0)) {
    throw ValidationError("split ratios must all be positive");
  }
  if (std::abs(r.train + r.validation + r.test - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }
}

std::array<std::size_t, 3> largest_remainder(std::size_t n, const SplitRatios& ratios) {
  validate_ratios(ratios);
  const std::array<double, 3> shares{ratios.train, ratios.validation, ratios.test};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = shares[i] * static_cast<double>(n);
    // Snap values within rounding noise of an integer (e.g. 0.7 * 10).
    const double nearest = std::round(exact);
    counts[i] = static_cast<std::size_t>(std::abs(exact - nearest) < 1e-9 ? nearest : std::floor(exact));
    remainders[i] = std::max(0.0, exact - static_cast<double>(counts[i]));
    assigned += counts[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
  return counts;
}

namespace {

const char* kPartitionNames[3] = {"train", "validation", "test"};

void check_non_empty(const DataSplit& split) {
  const std::array<const std::vector<PairInstance>*, 3> lists{&split.train, &split.validation,
                                                             &split.test};
  for (std::size_t i = 0; i < 3; ++i) {
    if (lists[i]->empty()) {
      throw ValidationError(std::string("split produced an empty ") + kPartitionNames[i] +
                            " partition");
    }
  }
}

// Assigns each group id to a partition and keeps pairs whose two groups agree.
template <typename GroupOf>
void split_by_groups(std::vector<PairInstance>& pairs, const SplitRatios& ratios,
                     std::uint64_t seed, GroupOf group_of, DataSplit& split) {
  std::set<std::string> group_set;
  for (const auto& p : pairs) {
    group_set.insert(group_of(p.drug_a));
    group_set.insert(group_of(p.drug_b));
  }
  std::vector<std::string> groups(group_set.begin(), group_set.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(groups));
  const auto counts = largest_remainder(groups.size(), ratios);
  std::map<std::string, int, std::less<>> partition;
  std::size_t idx = 0;
  for (int part = 0; part < 3; ++part) {
    for (std::size_t k = 0; k < counts[part]; ++k) partition.emplace(groups[idx++], part);
  }
  std::array<std::vector<PairInstance>*, 3> lists{&split.train, &split.validation, &split.test};
  for (auto& p : pairs) {
    const int pa = partition.at(group_of(p.drug_a));
    const int pb = partition.at(group_of(p.drug_b));
    if (pa == pb) {
      lists[pa]->push_back(std::move(p));
    } else {
      ++split.dropped;
    }
  }
}

}  // namespace

DataSplit split_dataset(std::span<const PairInstance> pairs, SplitProtocol protocol,
                        const SplitRatios& ratios, std::uint64_t seed,
                        const DrugCatalog* catalog) {
  validate_ratios(ratios);
  std::vector<PairInstance> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(), [](const PairInstance& a, const PairInstance& b) {
    return std::tie(a.drug_a, a.drug_b) < std::tie(b.drug_a, b.drug_b);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].drug_a == sorted[i - 1].drug_a && sorted[i].drug_b == sorted[i - 1].drug_b) {
      throw ValidationError("duplicate pair " + sorted[i].key());
    }
  }

  DataSplit split;
  split.protocol = protocol;
  split.seed = seed;

  switch (protocol) {
    case SplitProtocol::Random: {
      Rng rng(seed);
      rng.shuffle(std::span<PairInstance>(sorted));
      const auto counts = largest_remainder(sorted.size(), ratios);
      auto it = sorted.begin();
      split.train.assign(std::make_move_iterator(it), std::make_move_iterator(it + counts[0]));
      it += counts[0];
      split.validation.assign(std::make_move_iterator(it), std::make_move_iterator(it + counts[1]));
      it += counts[1];
      split.test.assign(std::make_move_iterator(it), std::make_move_iterator(sorted.end()));
      break;
    }
    case SplitProtocol::ColdStart:
      split_by_groups(sorted, ratios, seed, [](const std::string& id) { return id; }, split);
      break;
    case SplitProtocol::Scaffold: {
      if (!catalog) throw ValidationError("scaffold split requires the drug catalog");
      for (const auto& p : sorted) {
        for (const auto* id : {&p.drug_a, &p.drug_b}) {
          if (!catalog->at(*id).profile.scaffold_id) {
            throw ValidationError("scaffold split requested but drug '" + *id +
                                  "' has no scaffold_id");
          }
        }
      }
      split_by_groups(
          sorted, ratios, seed,
          [catalog](const std::string& id) { return *catalog->at(id).profile.scaffold_id; }, split);
      break;
    }
  }
  check_non_empty(split);
  return split;
}

ClassWeights class_weights(std::span<const PairInstance> train_pairs) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& p : train_pairs) {
    if (p.label == PairLabel::Positive) ++pos;
    if (p.label == PairLabel::ReliableNegative) ++neg;
  }
  if (pos == 0 || neg == 0) {
    throw ValidationError("degenerate training set: need at least one positive and one reliable negative (got " +
                          std::to_string(pos) + " / " + std::to_string(neg) + ")");
  }
  return ClassWeights{static_cast<double>(neg) / static_cast<double>(pos), 1.0};
}

}  // namespace ddi::corpus

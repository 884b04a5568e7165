#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "ddi/corpus.hpp"
#include "ddi/error.hpp"
#include "ddi/random.hpp"
#include "fixtures.hpp"

using namespace ddi::corpus;
using fixture::TempDir;
using fixture::write;

namespace {

DrugCatalog load_toy(const fixture::fs::path& dir) {
  const auto p = fixture::write_toy(dir);
  const std::array<fixture::fs::path, 2> emb{p.mol2vec, p.smilesbert};
  auto catalog = load_catalog(p.drugs, emb, p.profiles);
  merge_scaffolds(catalog, p.scaffolds);
  return catalog;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ddi::ValidationError& e) {
    return e.what();
  }
  return "";
}

// n pairs over a pool of drug ids, labels alternating.
std::vector<PairInstance> random_pairs(ddi::Rng& rng, std::size_t drugs, std::size_t n) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<PairInstance> out;
  while (out.size() < n) {
    auto a = "D" + std::to_string(rng.below(drugs));
    auto b = "D" + std::to_string(rng.below(drugs));
    if (a == b) continue;
    auto [x, y] = canonical_pair(a, b);
    if (!seen.emplace(x, y).second) continue;
    out.push_back({x, y, out.size() % 2 ? PairLabel::Positive : PairLabel::ReliableNegative});
  }
  return out;
}

std::set<std::string> drugs_of(const std::vector<PairInstance>& pairs) {
  std::set<std::string> s;
  for (const auto& p : pairs) {
    s.insert(p.drug_a);
    s.insert(p.drug_b);
  }
  return s;
}

}  // namespace

TEST(LoadCatalog, ToyFixtureLoads) {
  TempDir dir;
  const auto catalog = load_toy(dir.path());
  EXPECT_EQ(catalog.size(), 6u);
  EXPECT_EQ(catalog.dimension("mol2vec"), 2u);
  EXPECT_EQ(catalog.dimension("smilesbert"), 2u);
  const auto& d2 = catalog.at("D2");
  EXPECT_TRUE(d2.profile.enzymes.contains("CYP3A4"));  // upper-cased on load
  EXPECT_EQ(d2.profile.scaffold_id, "SA");
  EXPECT_FALSE(catalog.at("D6").profile.scaffold_id.has_value());
  EXPECT_TRUE(catalog.at("D6").profile.strong_pk_modulator);
  EXPECT_EQ(catalog.at("D4").smiles, "");
}

TEST(LoadCatalog, EmbeddingForUnknownDrugReportsLine) {
  TempDir dir;
  const auto p = fixture::write_toy(dir.path());
  write(p.mol2vec, fixture::read(p.mol2vec) + R"({"drug_id": "X", "source": "mol2vec", "vector": [1, 2]})" "\n");
  const std::array<fixture::fs::path, 2> emb{p.mol2vec, p.smilesbert};
  try {
    load_catalog(p.drugs, emb, p.profiles);
    FAIL() << "expected a ParseError";
  } catch (const ddi::ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_NE(std::string(e.what()).find("unknown drug_id"), std::string::npos);
  }
}

TEST(LoadCatalog, DimensionMismatchWithinSource) {
  TempDir dir;
  const auto p = fixture::write_toy(dir.path());
  auto text = fixture::read(p.mol2vec);
  text.replace(text.find("[0.2, 0.8]"), 10, "[0.2]");
  write(p.mol2vec, text);
  const std::array<fixture::fs::path, 2> emb{p.mol2vec, p.smilesbert};
  EXPECT_NE(error_of([&] { load_catalog(p.drugs, emb, p.profiles); }).find("dimension mismatch"),
            std::string::npos);
}

TEST(LoadCatalog, DuplicateDrugAndMalformedLines) {
  TempDir dir;
  const auto p = fixture::write_toy(dir.path());
  const std::array<fixture::fs::path, 2> emb{p.mol2vec, p.smilesbert};
  write(p.drugs, "drug_id,smiles\nD1,C\nD1,CC\n");
  EXPECT_NE(error_of([&] { load_catalog(p.drugs, emb, p.profiles); }).find("duplicate drug_id"),
            std::string::npos);
  write(p.drugs, "id,smiles\nD1,C\n");
  EXPECT_THROW(load_catalog(p.drugs, emb, p.profiles), ddi::ParseError);
  fixture::write_toy(dir.path());
  write(p.profiles, fixture::read(p.profiles) + "{not json\n");
  EXPECT_THROW(load_catalog(p.drugs, emb, p.profiles), ddi::ParseError);
}

TEST(LoadCatalog, MissingProfileOrEmbeddingIsAnError) {
  TempDir dir;
  const auto p = fixture::write_toy(dir.path());
  const std::array<fixture::fs::path, 2> emb{p.mol2vec, p.smilesbert};
  write(p.drugs, fixture::read(p.drugs) + "D7,C\n");
  EXPECT_THROW(load_catalog(p.drugs, emb, p.profiles), ddi::ValidationError);
}

TEST(MergeScaffolds, UnknownDrugAndHeaderChecked) {
  TempDir dir;
  auto catalog = load_toy(dir.path());
  write(dir / "s.csv", "drug_id,scaffold\nZZ,c1ccccc1\n");
  EXPECT_THROW(merge_scaffolds(catalog, dir / "s.csv"), ddi::ParseError);
  write(dir / "s.csv", "drug,scaffold\nD1,x\n");
  EXPECT_THROW(merge_scaffolds(catalog, dir / "s.csv"), ddi::ParseError);
  write(dir / "s.csv", "drug_id,scaffold\r\nD1,\"c1ccc(cc1)C,N\"\r\n");
  merge_scaffolds(catalog, dir / "s.csv");
  EXPECT_EQ(catalog.at("D1").profile.scaffold_id, "c1ccc(cc1)C,N");
}

TEST(LoadPairs, ParsesAndRejects) {
  TempDir dir;
  write(dir / "p.csv", "drug_a,drug_b,documented\nA,B,1\nB,C,0\n");
  const auto pairs = load_pairs(dir / "p.csv");
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_TRUE(pairs[0].documented);
  EXPECT_FALSE(pairs[1].documented);
  write(dir / "p.csv", "drug_a,drug_b,documented\nA,B,2\n");
  EXPECT_THROW(load_pairs(dir / "p.csv"), ddi::ParseError);
}

TEST(PuLabels, ToyFixtureLabels) {
  TempDir dir;
  const auto catalog = load_toy(dir.path());
  const auto raw = load_pairs(dir / "pairs.csv");
  const auto labeled = assign_pu_labels(raw, catalog);
  ASSERT_EQ(labeled.size(), 10u);
  auto label_of = [&](const std::string& a, const std::string& b) {
    for (const auto& p : labeled) {
      if (p.drug_a == a && p.drug_b == b) return p.label;
    }
    throw std::runtime_error("pair missing");
  };
  EXPECT_EQ(label_of("D1", "D2"), PairLabel::Positive);
  EXPECT_EQ(label_of("D2", "D3"), PairLabel::Positive);  // canonicalized from D3,D2
  EXPECT_EQ(label_of("D1", "D3"), PairLabel::ReliableNegative);
  EXPECT_EQ(label_of("D3", "D6"), PairLabel::Unknown);  // shared CYP2D6
  EXPECT_TRUE(std::is_sorted(labeled.begin(), labeled.end(),
                             [](const auto& a, const auto& b) { return a.key() < b.key(); }));
}

TEST(PuLabels, HighSideEffectOverlapIsUnknown) {
  TempDir dir;
  const auto catalog = load_toy(dir.path());
  // D1 and D2 share S1, S2 (Jaccard 0.5) and CYP3A4; D1/D4 share nothing.
  const std::vector<RawPair> raw{{"D1", "D2", false}, {"D1", "D4", false}};
  const auto labeled = assign_pu_labels(raw, catalog, 0.1);
  EXPECT_EQ(labeled[0].label, PairLabel::Unknown);
  EXPECT_EQ(labeled[1].label, PairLabel::ReliableNegative);
  // tau_neg = 0 means no pair can be "below" it.
  EXPECT_EQ(assign_pu_labels(raw, catalog, 0.0)[1].label, PairLabel::Unknown);
}

TEST(PuLabels, SwapInvariantAndDuplicatesMerged) {
  TempDir dir;
  const auto catalog = load_toy(dir.path());
  auto raw = load_pairs(dir / "pairs.csv");
  auto swapped = raw;
  for (auto& p : swapped) std::swap(p.drug_a, p.drug_b);
  EXPECT_EQ(assign_pu_labels(raw, catalog), assign_pu_labels(swapped, catalog));

  const std::vector<RawPair> dup{{"D1", "D3", false}, {"D3", "D1", true}};
  const auto merged = assign_pu_labels(dup, catalog);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].label, PairLabel::Positive);
}

TEST(PuLabels, SelfPairAndUnknownDrugRejected) {
  TempDir dir;
  const auto catalog = load_toy(dir.path());
  const std::vector<RawPair> self{{"D1", "D1", true}};
  EXPECT_THROW(assign_pu_labels(self, catalog), ddi::ValidationError);
  const std::vector<RawPair> unknown{{"D1", "Q", true}};
  EXPECT_NE(error_of([&] { assign_pu_labels(unknown, catalog); }).find("unknown drug_id"),
            std::string::npos);
}

TEST(LargestRemainder, ExamplesAndConservation) {
  EXPECT_EQ(largest_remainder(10, {}), (std::array<std::size_t, 3>{8, 1, 1}));
  EXPECT_EQ(largest_remainder(9, {}), (std::array<std::size_t, 3>{7, 1, 1}));
  EXPECT_EQ(largest_remainder(5, {}), (std::array<std::size_t, 3>{4, 1, 0}));
  EXPECT_EQ(largest_remainder(10, {0.7, 0.2, 0.1}), (std::array<std::size_t, 3>{7, 2, 1}));
  for (std::size_t n = 0; n < 500; ++n) {
    const auto c = largest_remainder(n, {0.6, 0.25, 0.15});
    EXPECT_EQ(c[0] + c[1] + c[2], n);
  }
}

TEST(SplitDataset, RandomSizesAndDeterminism) {
  ddi::Rng rng(1);
  const auto pairs = random_pairs(rng, 30, 10);
  const auto a = split_dataset(pairs, SplitProtocol::Random, {}, 13);
  EXPECT_EQ(a.train.size(), 8u);
  EXPECT_EQ(a.validation.size(), 1u);
  EXPECT_EQ(a.test.size(), 1u);
  const auto b = split_dataset(pairs, SplitProtocol::Random, {}, 13);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  auto reversed = pairs;
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(split_dataset(reversed, SplitProtocol::Random, {}, 13).train, a.train);
}

TEST(SplitDataset, ColdStartDisjointAndDropsCounted) {
  ddi::Rng rng(2);
  const auto pairs = random_pairs(rng, 40, 300);
  const auto s = split_dataset(pairs, SplitProtocol::ColdStart, {}, 5);
  const auto train = drugs_of(s.train);
  for (const auto& id : drugs_of(s.test)) EXPECT_FALSE(train.contains(id)) << id;
  for (const auto& id : drugs_of(s.validation)) EXPECT_FALSE(train.contains(id)) << id;
  EXPECT_EQ(s.train.size() + s.validation.size() + s.test.size() + s.dropped, pairs.size());
}

TEST(SplitDataset, ScaffoldRequiresIdsAndKeepsThemDisjoint) {
  TempDir dir;
  auto catalog = load_toy(dir.path());
  const auto labeled = assign_pu_labels(load_pairs(dir / "pairs.csv"), catalog);
  EXPECT_NE(error_of([&] { split_dataset(labeled, SplitProtocol::Scaffold, {}, 1, &catalog); })
                .find("scaffold"),
            std::string::npos);
  EXPECT_THROW(split_dataset(labeled, SplitProtocol::Scaffold, {}, 1, nullptr), ddi::ValidationError);
}

TEST(SplitDataset, RejectsBadRatiosAndDuplicates) {
  ddi::Rng rng(3);
  auto pairs = random_pairs(rng, 20, 20);
  EXPECT_THROW(split_dataset(pairs, SplitProtocol::Random, {0.5, 0.5, 0.5}, 1), ddi::ValidationError);
  EXPECT_THROW(split_dataset(pairs, SplitProtocol::Random, {1.0, 0.0, 0.0}, 1), ddi::ValidationError);
  pairs.push_back(pairs.front());
  EXPECT_THROW(split_dataset(pairs, SplitProtocol::Random, {}, 1), ddi::ValidationError);
}

TEST(SplitDataset, EmptyPartitionIsAnError) {
  const std::vector<PairInstance> two{{"A", "B", PairLabel::Positive}, {"A", "C", PairLabel::Positive}};
  EXPECT_THROW(split_dataset(two, SplitProtocol::Random, {}, 1), ddi::ValidationError);
}

TEST(ClassWeights, InverseFrequency) {
  std::vector<PairInstance> pairs;
  for (int i = 0; i < 2; ++i) pairs.push_back({"A", "B" + std::to_string(i), PairLabel::Positive});
  for (int i = 0; i < 8; ++i) pairs.push_back({"C", "D" + std::to_string(i), PairLabel::ReliableNegative});
  const auto w = class_weights(pairs);
  EXPECT_EQ(w.positive, 4.0);
  EXPECT_EQ(w.negative, 1.0);
  pairs.resize(2);
  EXPECT_NE(error_of([&] { class_weights(pairs); }).find("degenerate training set"), std::string::npos);
  std::vector<PairInstance> balanced;
  for (int i = 0; i < 5; ++i) {
    balanced.push_back({"A", "P" + std::to_string(i), PairLabel::Positive});
    balanced.push_back({"A", "N" + std::to_string(i), PairLabel::ReliableNegative});
  }
  EXPECT_EQ(class_weights(balanced).positive, 1.0);
}

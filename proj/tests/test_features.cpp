#include <gtest/gtest.h>

#include "ddi/error.hpp"
#include "ddi/features.hpp"
#include "ddi/random.hpp"
#include "fixtures.hpp"

using namespace ddi::features;

namespace {

std::vector<double> random_vector(ddi::Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  for (double& x : v) x = rng.normal(0.0, 3.0);
  return v;
}

ddi::corpus::DrugCatalog toy_catalog(const fixture::fs::path& dir) {
  const auto p = fixture::write_toy(dir);
  const std::array<fixture::fs::path, 2> emb{p.mol2vec, p.smilesbert};
  return ddi::corpus::load_catalog(p.drugs, emb, p.profiles);
}

}  // namespace

TEST(Fuse, Examples) {
  const std::vector<double> e1{1, 0}, e2{0, 1};
  EXPECT_EQ(fuse(e1, e2, 1.0), e1);
  EXPECT_EQ(fuse(e1, e2, 0.0), e2);
  EXPECT_EQ(fuse(e1, e2, 0.5), (std::vector<double>{0.5, 0.5}));
  const std::vector<double> e{0.3, -2.5, 7.0};
  for (double l : {0.0, 0.25, 0.5, 0.9}) {
    const auto f = fuse(e, e, l);
    for (std::size_t k = 0; k < e.size(); ++k) EXPECT_NEAR(f[k], e[k], 1e-15);
  }
}

TEST(Fuse, RejectsMismatchAndBadLambda) {
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_THROW(fuse(a, b, 0.5), ddi::ValidationError);
  EXPECT_THROW(fuse(a, a, 1.5), ddi::ValidationError);
  EXPECT_THROW(fuse(a, a, -0.1), ddi::ValidationError);
}

TEST(Fuse, HomogeneousInScale) {
  ddi::Rng rng(4);
  const auto e1 = random_vector(rng, 8), e2 = random_vector(rng, 8);
  std::vector<double> s1(e1), s2(e2);
  for (auto& x : s1) x *= 2.0;
  for (auto& x : s2) x *= 2.0;
  const auto f = fuse(e1, e2, 0.3);
  const auto g = fuse(s1, s2, 0.3);
  for (std::size_t k = 0; k < f.size(); ++k) EXPECT_EQ(g[k], 2.0 * f[k]);
}

TEST(PairFeatures, HandEvaluated) {
  const std::vector<double> ei{1, 2}, ej{3, 0};
  EXPECT_EQ(pair_features(ei, ej), (std::vector<double>{2, 2, 3, 0, 4, 4, 2, 1}));
  const std::vector<double> e{1.5, -2};
  EXPECT_EQ(pair_features(e, e), (std::vector<double>{0, 0, 2.25, 4, 0, 0, 1.5, -2}));
}

TEST(PairFeatures, BitwiseSymmetric) {
  ddi::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto d = 1 + rng.below(16);
    const auto a = random_vector(rng, d), b = random_vector(rng, d);
    EXPECT_EQ(pair_features(a, b), pair_features(b, a));
  }
}

TEST(PairFeatures, LayoutAndLengthChecks) {
  constexpr auto l = layout_for(5);
  EXPECT_EQ(l.hadamard, 5u);
  EXPECT_EQ(l.sq_diff, 10u);
  EXPECT_EQ(l.mean, 15u);
  EXPECT_EQ(l.clinical, 20u);
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_THROW(pair_features(a, b), ddi::ValidationError);
}

TEST(AssembleInput, AppendsScore) {
  const std::vector<double> f{1, 2, 3, 4};
  EXPECT_EQ(assemble_input(f, 0.5), (std::vector<double>{1, 2, 3, 4, 0.5}));
  EXPECT_EQ(assemble_input(f, 0.0).back(), 0.0);
  EXPECT_THROW(assemble_input(f, 1.2), ddi::ValidationError);
  EXPECT_THROW(assemble_input(f, -0.01), ddi::ValidationError);
}

TEST(PairFeaturizer, MatchesManualAssembly) {
  fixture::TempDir dir;
  const auto catalog = toy_catalog(dir.path());
  const PairFeaturizer fz(catalog, {});
  EXPECT_EQ(fz.embedding_dim(), 2u);
  EXPECT_EQ(fz.input_dim(), 9u);
  const auto& d1 = catalog.at("D1");
  const auto& d2 = catalog.at("D2");
  const auto e1 = fuse(d1.embeddings.at("mol2vec"), d1.embeddings.at("smilesbert"), 0.5);
  const auto e2 = fuse(d2.embeddings.at("mol2vec"), d2.embeddings.at("smilesbert"), 0.5);
  const double s = ddi::rbscore::score_pair(d1.profile, d2.profile).normalized;
  EXPECT_EQ(fz.compute("D1", "D2"), assemble_input(pair_features(e1, e2), s));
  EXPECT_EQ(fz.compute("D1", "D2"), fz.compute("D2", "D1"));
  EXPECT_THROW(fz.compute("D1", "nope"), ddi::ValidationError);
}

TEST(PairFeaturizer, AblationDropsScoreColumn) {
  fixture::TempDir dir;
  const auto catalog = toy_catalog(dir.path());
  FeatureOptions o;
  o.include_rbscore = false;
  const PairFeaturizer fz(catalog, o);
  EXPECT_EQ(fz.input_dim(), 8u);
  EXPECT_EQ(fz.compute("D3", "D4").size(), 8u);
}

TEST(PairFeaturizer, MaterializedEqualsLazy) {
  fixture::TempDir dir;
  const auto catalog = toy_catalog(dir.path());
  const PairFeaturizer fz(catalog, {});
  const std::vector<ddi::corpus::PairInstance> pairs{{"D1", "D2"}, {"D3", "D5"}};
  const auto lazy = fz.lazy();
  const auto mat = fz.materialize(pairs);
  std::vector<double> a(fz.input_dim()), b(fz.input_dim());
  for (const auto& p : pairs) {
    lazy(p, a);
    mat(p, b);
    EXPECT_EQ(a, b);
  }
  const ddi::corpus::PairInstance other{"D4", "D6"};
  lazy(other, a);
  mat(other, b);
  EXPECT_EQ(a, b);
}

TEST(PairFeaturizer, RequiresBothSources) {
  ddi::corpus::DrugCatalog catalog;
  ddi::corpus::DrugRecord r;
  r.drug_id = "A";
  r.embeddings["mol2vec"] = {1.0, 2.0};
  catalog.add(r);
  EXPECT_THROW(PairFeaturizer(catalog, {}), ddi::ValidationError);
}

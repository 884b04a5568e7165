#include <gtest/gtest.h>

#include "ddi/error.hpp"
#include "ddi/random.hpp"
#include "ddi/rbscore.hpp"

using ddi::corpus::ClinicalProfile;
using namespace ddi::rbscore;

namespace {

ClinicalProfile random_profile(ddi::Rng& rng) {
  auto tokens = [&](const char* prefix, std::size_t vocab, std::size_t max) {
    std::set<std::string> out;
    const auto n = rng.below(max + 1);
    for (std::uint64_t i = 0; i < n; ++i) out.insert(prefix + std::to_string(rng.below(vocab)));
    return out;
  };
  ClinicalProfile p;
  p.enzymes = tokens("CYP", 5, 2);
  p.targets = tokens("T", 8, 3);
  p.therapeutic_groups = tokens("G", 4, 1);
  p.side_effects = tokens("S", 6, 5);
  for (const auto& base : tokens("", 3, 2)) p.atc_codes.insert("A1" + base + "BC01");
  p.strong_pk_modulator = rng.bernoulli(0.2);
  return p;
}

}  // namespace

TEST(SideEffectSimilarity, JaccardByHand) {
  EXPECT_EQ(side_effect_similarity({"a", "b"}, {"a", "b"}), 1.0);
  EXPECT_EQ(side_effect_similarity({"a"}, {"b"}), 0.0);
  EXPECT_EQ(side_effect_similarity({"a", "b", "c"}, {"b", "c", "d"}), 0.5);
  EXPECT_EQ(side_effect_similarity({}, {}), 0.0);
}

TEST(AtcMatch, SharesLevelThreePrefix) {
  EXPECT_EQ(atc_match({"A10BA02"}, {"A10BB01"}), 1);
  EXPECT_EQ(atc_match({"A10BA02"}, {"C09AA01"}), 0);
  EXPECT_EQ(atc_match({}, {"A10BA02"}), 0);
  EXPECT_EQ(atc_match({"A10"}, {"A10"}), 0);
  EXPECT_EQ(atc_match({"C09AA01", "A10BA02"}, {"A10BX"}), 1);
}

TEST(ScorePair, AllRulesFire) {
  ClinicalProfile a, b;
  a.enzymes = b.enzymes = {"CYP3A4"};
  a.targets = b.targets = {"T1"};
  a.atc_codes = {"A10BA02"};
  b.atc_codes = {"A10BB01"};
  a.therapeutic_groups = b.therapeutic_groups = {"G1"};
  a.side_effects = b.side_effects = {"S1"};
  a.strong_pk_modulator = true;
  const auto r = score_pair(a, b);
  EXPECT_EQ(r.raw_sum, 6);
  EXPECT_EQ(r.normalized, 1.0);
}

TEST(ScorePair, NothingFires) {
  const auto r = score_pair(ClinicalProfile{}, ClinicalProfile{});
  EXPECT_EQ(r, RuleBreakdown{});
  EXPECT_EQ(r.normalized, 0.0);
}

TEST(ScorePair, EnzymeAndAtcOnlyIsTwoSixths) {
  ClinicalProfile a, b;
  a.enzymes = {"CYP3A4", "CYP2C9"};
  b.enzymes = {"CYP3A4"};
  a.atc_codes = {"A10BA02"};
  b.atc_codes = {"A10BB01"};
  a.side_effects = {"S1", "S2"};
  b.side_effects = {"S3"};
  const auto r = score_pair(a, b);
  EXPECT_EQ(r.shared_enzyme, 1);
  EXPECT_EQ(r.atc_match, 1);
  EXPECT_EQ(r.raw_sum, 2);
  EXPECT_EQ(r.normalized, 2.0 / 6.0);
}

TEST(ScorePair, SideEffectThresholdIsStrict) {
  ClinicalProfile a, b;
  a.side_effects = {"a", "b", "c"};
  b.side_effects = {"b", "c", "d"};
  EXPECT_EQ(score_pair(a, b, 0.5).side_effect_sim_hit, 0);
  EXPECT_EQ(score_pair(a, b, 0.49).side_effect_sim_hit, 1);
}

TEST(ScorePair, PkModulatorOnEitherSide) {
  ClinicalProfile a, b;
  b.strong_pk_modulator = true;
  EXPECT_EQ(score_pair(a, b).pk_modulator, 1);
  EXPECT_EQ(score_pair(b, a).pk_modulator, 1);
}

TEST(ScorePair, RejectsTauOutsideUnitInterval) {
  EXPECT_THROW(score_pair({}, {}, 1.5), ddi::ValidationError);
  EXPECT_THROW(score_pair({}, {}, -0.1), ddi::ValidationError);
}

TEST(ScorePair, SymmetricAndOnTheSixthsGrid) {
  ddi::Rng rng(99);
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_profile(rng);
    const auto b = random_profile(rng);
    const auto ab = score_pair(a, b);
    EXPECT_EQ(ab, score_pair(b, a));
    EXPECT_EQ(ab.normalized, ab.raw_sum / 6.0);
    EXPECT_EQ(ab.raw_sum, ab.shared_enzyme + ab.shared_target + ab.atc_match + ab.group_match +
                              ab.side_effect_sim_hit + ab.pk_modulator);
  }
}

TEST(ScorePair, AddingSharedEnzymeNeverLowersScore) {
  ddi::Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    auto a = random_profile(rng);
    auto b = random_profile(rng);
    const int before = score_pair(a, b).raw_sum;
    a.enzymes.insert("CYPX");
    b.enzymes.insert("CYPX");
    EXPECT_GE(score_pair(a, b).raw_sum, before);
  }
}

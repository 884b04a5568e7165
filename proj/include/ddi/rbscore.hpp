#pragma once

#include <set>
#include <string>

#include "ddi/profile.hpp"

namespace ddi::rbscore {

inline constexpr double kDefaultTauSe = 0.3;
inline constexpr int kRuleCount = 6;

// Firing pattern of the six clinical rules for one drug pair.
struct RuleBreakdown {
  int shared_enzyme = 0;
  int shared_target = 0;
  int atc_match = 0;
  int group_match = 0;
  int side_effect_sim_hit = 0;
  int pk_modulator = 0;
  int raw_sum = 0;
  double normalized = 0.0;

  bool operator==(const RuleBreakdown&) const = default;
};

// True when the two sorted sets share at least one element.
bool intersects(const std::set<std::string>& a, const std::set<std::string>& b);

// Jaccard index |A n B| / |A u B|; 0 when both sets are empty.
double side_effect_similarity(const std::set<std::string>& a,
                              const std::set<std::string>& b);

// 1 iff some code in each set shares the 4-character ATC level-3 prefix
// (e.g. "A10B"). Codes shorter than 4 characters never match.
int atc_match(const std::set<std::string>& codes_a,
              const std::set<std::string>& codes_b);

// Scores a pair from profile fields only; never sees interaction labels.
// Symmetric in (a, b). Throws ValidationError when tau_se is outside [0, 1].
RuleBreakdown score_pair(const corpus::ClinicalProfile& a,
                         const corpus::ClinicalProfile& b,
                         double tau_se = kDefaultTauSe);

}  // namespace ddi::rbscore

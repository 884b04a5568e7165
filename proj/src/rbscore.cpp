#include "ddi/rbscore.hpp"

#include <string_view>

#include "ddi/error.hpp"

namespace ddi::rbscore {

namespace {

std::size_t intersection_size(const std::set<std::string>& a,
                              const std::set<std::string>& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

}  // namespace

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

double side_effect_similarity(const std::set<std::string>& a,
                              const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  const std::size_t common = intersection_size(a, b);
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

int atc_match(const std::set<std::string>& codes_a,
              const std::set<std::string>& codes_b) {
  std::set<std::string_view> prefixes;
  for (const auto& code : codes_a) {
    if (code.size() >= 4) prefixes.insert(std::string_view(code).substr(0, 4));
  }
  for (const auto& code : codes_b) {
    if (code.size() >= 4 && prefixes.contains(std::string_view(code).substr(0, 4))) {
      return 1;
    }
  }
  return 0;
}

RuleBreakdown score_pair(const corpus::ClinicalProfile& a,
                         const corpus::ClinicalProfile& b, double tau_se) {
  if (!(tau_se >= 0.0 && tau_se <= 1.0)) {
    throw ValidationError("tau_se must lie in [0, 1], got " + std::to_string(tau_se));
  }
  RuleBreakdown r;
  r.shared_enzyme = intersects(a.enzymes, b.enzymes) ? 1 : 0;
  r.shared_target = intersects(a.targets, b.targets) ? 1 : 0;
  r.atc_match = atc_match(a.atc_codes, b.atc_codes);
  r.group_match = intersects(a.therapeutic_groups, b.therapeutic_groups) ? 1 : 0;
  r.side_effect_sim_hit = side_effect_similarity(a.side_effects, b.side_effects) > tau_se ? 1 : 0;
  r.pk_modulator = (a.strong_pk_modulator || b.strong_pk_modulator) ? 1 : 0;
  r.raw_sum = r.shared_enzyme + r.shared_target + r.atc_match + r.group_match +
              r.side_effect_sim_hit + r.pk_modulator;
  r.normalized = static_cast<double>(r.raw_sum) / kRuleCount;
  return r;
}

}  // namespace ddi::rbscore

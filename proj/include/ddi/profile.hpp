#pragma once

#include <optional>
#include <set>
#include <string>

namespace ddi::corpus {

// Label-independent pharmacological properties of one drug. Tokens are
// upper-cased on load so set comparisons are case-insensitive.
struct ClinicalProfile {
  std::set<std::string> enzymes;
  std::set<std::string> targets;
  std::set<std::string> atc_codes;
  std::set<std::string> therapeutic_groups;
  std::set<std::string> side_effects;
  bool strong_pk_modulator = false;
  std::optional<std::string> scaffold_id;

  bool operator==(const ClinicalProfile&) const = default;
};

}  // namespace ddi::corpus

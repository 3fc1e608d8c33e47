#include "mll/varset.hpp"

#include <algorithm>

#include "mll/errors.hpp"

namespace mll {

const char* errc_name(errc c) {
  switch (c) {
    case errc::positivity_violation: return "PositivityViolation";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::not_a_subset: return "NotASubset";
    case errc::overlapping_sets: return "OverlappingSets";
    case errc::not_nested: return "NotNested";
    case errc::not_strictly_nested: return "NotStrictlyNested";
    case errc::not_binary: return "NotBinary";
    case errc::missing_subset: return "MissingSubset";
    case errc::effect_absent: return "EffectAbsent";
    case errc::equivalence_breach: return "EquivalenceBreach";
    case errc::query_too_large: return "QueryTooLarge";
    case errc::bad_partition: return "BadPartition";
    case errc::not_covered: return "NotCovered";
    case errc::parse_error: return "ParseError";
    case errc::spec_invalid: return "SpecInvalid";
    case errc::margin_not_in_universe: return "MarginNotInV";
    case errc::usage: return "Usage";
  }
  return "Error";
}

namespace {
bool card_lex_less(VarSet a, VarSet b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.ids() < b.ids();
}
}  // namespace

std::vector<VarSet> subsets_sorted(VarSet s) {
  std::vector<VarSet> out;
  const std::uint32_t mask = s.bits();
  out.reserve(std::size_t{1} << s.size());
  std::uint32_t sub = 0;
  while (true) {
    out.push_back(VarSet(sub));
    if (sub == mask) break;
    sub = (sub - mask) & mask;  // next submask in increasing numeric order
  }
  std::sort(out.begin(), out.end(), card_lex_less);
  return out;
}

std::vector<VarSet> supersets_within(VarSet core, VarSet s) {
  std::vector<VarSet> out;
  for (VarSet free : subsets_sorted(s - core)) out.push_back(core | free);
  std::sort(out.begin(), out.end(), card_lex_less);
  return out;
}

}  // namespace mll

#include "mll/spec.hpp"

#include <algorithm>
#include <map>

#include "mll/errors.hpp"

namespace mll {

std::vector<EffectMargin> MarginalSpec::pairs() const {
  std::vector<EffectMargin> out;
  for (const auto& mb : margins)
    for (VarSet e : mb.effects) out.push_back({e, mb.margin});
  return out;
}

namespace {

void validate(const MarginalSpec& spec, VarSet universe) {
  std::vector<VarSet> seen;
  for (const auto& mb : spec.margins) {
    if (!mb.margin.subset_of(universe) || mb.margin.empty())
      fail(errc::margin_not_in_universe,
           "margin " + mb.margin.to_string() + " not a nonempty subset of " + universe.to_string());
    if (std::find(seen.begin(), seen.end(), mb.margin) != seen.end())
      fail(errc::spec_invalid, "margin " + mb.margin.to_string() + " listed twice");
    seen.push_back(mb.margin);
    for (VarSet e : mb.effects)
      if (!e.subset_of(mb.margin))
        fail(errc::spec_invalid,
             "effect " + e.to_string() + " not within margin " + mb.margin.to_string());
  }
}

}  // namespace

ClassifyResult classify(const MarginalSpec& spec, VarSet universe) {
  validate(spec, universe);
  ClassifyResult res;

  // --- completeness: every nonempty effect exactly once ---
  std::map<std::uint32_t, int> count;
  for (const auto& mb : spec.margins)
    for (VarSet e : mb.effects)
      if (!e.empty()) ++count[e.bits()];
  res.complete = true;
  for (VarSet e : subsets_sorted(universe)) {
    if (e.empty()) continue;
    const auto it = count.find(e.bits());
    const int n = it == count.end() ? 0 : it->second;
    if (n == 0) {
      res.complete = false;
      res.violations.push_back("effect " + e.to_string() + " missing");
    } else if (n > 1) {
      res.complete = false;
      res.violations.push_back("effect " + e.to_string() + " listed " + std::to_string(n) +
                               " times");
    }
  }

  // --- hierarchy: an ascending order must exist in which every effect's
  // host margin comes before any other margin containing the effect. Both
  // requirements are precedence constraints, so the verdict is acyclicity of
  // the combined precedence graph and does not depend on the listed order.
  const int m = static_cast<int>(spec.margins.size());
  std::vector<std::vector<int>> succ(m);
  auto add_edge = [&](int a, int b) { succ[a].push_back(b); };
  bool edge_violation = false;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      if (spec.margins[i].margin.strict_subset_of(spec.margins[j].margin)) add_edge(i, j);
    }
  }
  for (int host = 0; host < m; ++host) {
    for (VarSet e : spec.margins[host].effects) {
      for (int other = 0; other < m; ++other) {
        if (other == host) continue;
        if (e.subset_of(spec.margins[other].margin)) {
          add_edge(host, other);
          if (spec.margins[other].margin.subset_of(spec.margins[host].margin)) {
            // The other container must precede the host by ascent, yet the
            // host must come first to own the effect: impossible.
            res.violations.push_back("effect " + e.to_string() + " in margin " +
                                     spec.margins[host].margin.to_string() +
                                     " is also contained in the smaller margin " +
                                     spec.margins[other].margin.to_string());
            edge_violation = true;
          }
        }
      }
    }
  }

  // Kahn topological check.
  std::vector<int> indeg(m, 0);
  for (int i = 0; i < m; ++i)
    for (int j : succ[i]) ++indeg[j];
  std::vector<int> queue;
  for (int i = 0; i < m; ++i)
    if (indeg[i] == 0) queue.push_back(i);
  int done = 0;
  while (!queue.empty()) {
    int i = queue.back();
    queue.pop_back();
    ++done;
    for (int j : succ[i])
      if (--indeg[j] == 0) queue.push_back(j);
  }
  res.hierarchical = done == m;
  if (!res.hierarchical && !edge_violation)
    res.violations.push_back("margin precedence constraints are cyclic; no ascending order works");
  return res;
}

MllSet evaluate_spec(const Table& t, const MarginalSpec& spec) {
  validate(spec, t.vars());
  MllSet out;
  std::map<std::uint32_t, MllSet> by_margin;
  for (const auto& mb : spec.margins) {
    auto it = by_margin.find(mb.margin.bits());
    if (it == by_margin.end())
      it = by_margin.emplace(mb.margin.bits(), expand_log_linear(t, mb.margin)).first;
    for (VarSet e : mb.effects) out.add(it->second.at(e, mb.margin));
  }
  return out;
}

MarginalSpec ordinary_spec(VarSet V) {
  MarginalSpec spec;
  MarginalSpec::MarginBlock mb{V, {}};
  for (VarSet e : subsets_sorted(V))
    if (!e.empty()) mb.effects.push_back(e);
  spec.margins.push_back(std::move(mb));
  return spec;
}

MarginalSpec multivariate_logistic_spec(VarSet V) {
  MarginalSpec spec;
  for (VarSet e : subsets_sorted(V)) {
    if (e.empty()) continue;
    spec.margins.push_back({e, {e}});
  }
  return spec;
}

}  // namespace mll

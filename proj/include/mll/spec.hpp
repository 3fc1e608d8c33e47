#pragma once

#include <string>
#include <vector>

#include "mll/engine.hpp"
#include "mll/table.hpp"

namespace mll {

/// A collection of (effect, margin) pairs grouped by margin, in the order the
/// user listed the margins.
struct MarginalSpec {
  struct MarginBlock {
    VarSet margin;
    std::vector<VarSet> effects;
  };
  std::vector<MarginBlock> margins;

  std::vector<EffectMargin> pairs() const;
};

struct ClassifyResult {
  bool hierarchical = false;
  bool complete = false;
  std::vector<std::string> violations;
};

/// Hierarchical: some ascending margin order exists in which every effect
/// sits in the first margin containing it. Complete: every nonempty subset of
/// the universe appears as an effect exactly once. The verdict is canonical
/// over reorderings of the margin list.
ClassifyResult classify(const MarginalSpec& spec, VarSet universe);

/// Every parameter of the collection evaluated on the table.
MllSet evaluate_spec(const Table& t, const MarginalSpec& spec);

/// The classical single-margin collection: every nonempty effect within V.
MarginalSpec ordinary_spec(VarSet V);

/// The effect-equals-margin collection, margins ordered by cardinality.
MarginalSpec multivariate_logistic_spec(VarSet V);

}  // namespace mll

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mll/table.hpp"
#include "mll/transform.hpp"

namespace mll {

/// A collapsibility question: does the interaction of `effect` look the same
/// in the condensed margin as in the larger one?
struct CollapseQuery {
  VarSet effect;                 // L
  VarSet margin;                 // M, the condensed table
  VarSet super;                  // N, the larger table, M strictly inside N
  std::optional<VarSet> common;  // S: check the whole family S within A within L
  bool strict = false;
  std::optional<double> tol;     // verdict tolerance override
};

/// A max-residual together with the cell where it is attained.
struct ResidualAt {
  double value = 0.0;
  Cell at;
  VarSet over;
};

struct EffectResidual {
  VarSet effect;
  double residual = 0.0;
  Cell at;
  bool ok = true;
};

struct CollapseReport {
  CollapseQuery query;
  double tolerance = 0.0;
  bool verdict = false;

  // Three equivalent single-effect conditions. delta is the definitional
  // check; the other two express it through mean defects of the condensed
  // margin and must agree with it to roundoff.
  ResidualAt delta;            // max |lambda_L^M - lambda_L^N|
  ResidualAt defect_gap;       // mean defect at L minus the sub-effect deltas
  ResidualAt alternating;      // alternating sum of mean defects over subsets of L
  bool cond_delta = false, cond_gap = false, cond_alternating = false;

  // Family query: direct per-effect checks for S within A within L, plus the
  // single alternating mean-defect identity equivalent to the whole family.
  std::vector<EffectResidual> family;
  ResidualAt family_identity;
  bool family_direct_ok = false, family_identity_ok = false;

  // Strict query: interactions strictly above the effect that leave the
  // condensed margin must vanish in the larger table. Checked three ways:
  // per-effect, through a two-sided fiber-mean contrast, and through one
  // aggregated sum.
  std::vector<EffectResidual> vanish;
  ResidualAt vanish_worst;
  ResidualAt nu_contrast;
  ResidualAt vanish_aggregate;
  bool collapsible_ok = false, vanish_ok = false, nu_contrast_ok = false, aggregate_ok = false;
};

/// log p_M(x_M) minus the mean of log p_N over the fiber above x_M.
double margin_defect(const Table& t, VarSet M, VarSet N, std::span<const int> x_M);

/// Mean of the defect over the M-cells agreeing with x on Z. Also computed as
/// nu_Z^M - nu_Z^N; the two routes must agree.
double margin_defect_mean(const Table& t, VarSet Z, VarSet M, VarSet N, std::span<const int> x_Z);

CollapseReport check_collapsibility(const CollapseQuery& q, const Table& t);
CollapseReport check_set_collapsibility(const CollapseQuery& q, const Table& t);
CollapseReport check_strict_collapsibility(const CollapseQuery& q, const Table& t);
CollapseReport check_strict_set(const CollapseQuery& q, const Table& t);

/// Dispatches on the strict flag and the presence of a common-effect core.
CollapseReport check_collapse_query(const CollapseQuery& q, const Table& t);

}  // namespace mll

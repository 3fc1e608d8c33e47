#pragma once

#include <span>
#include <vector>

#include "mll/collapse.hpp"
#include "mll/table.hpp"

namespace mll {

enum class IndepMode { conditional, joint, mutual };

const char* indep_mode_name(IndepMode m);

/// Three disjoint variable groups; c may be empty except for mutual tests.
struct Partition {
  VarSet a, b, c;
  VarSet all() const { return a | b | c; }
};

/// Verdict with both kinds of evidence: the largest parameter in the family
/// that must vanish, and the worst cellwise factorization error.
struct IndependenceVerdict {
  IndepMode mode = IndepMode::conditional;
  double lambda_evidence = 0.0;
  VarSet lambda_effect;
  Cell lambda_at;
  double oracle_evidence = 0.0;
  Cell oracle_at;
  bool lambda_ok = false;
  bool oracle_ok = false;
  bool verdict = false;
  bool agree = false;
};

IndependenceVerdict test_independence(const Table& t, const Partition& part, IndepMode mode);

/// Residual of carrying an effect that contains `a` (plus any D within c)
/// from the abc margin to the ac margin. Small whenever a is conditionally
/// independent of b given c; the premise is tested first and reported.
struct TransferResult {
  bool premise = false;
  double residual = 0.0;
  VarSet effect;
  Cell at;
};
TransferResult margin_transfer_residual(const Table& t, const Partition& part, VarSet D);

/// Joint run of an independence test and the matching strict-collapsibility
/// family over the full table, which must agree in both directions.
struct SuiteResult {
  IndependenceVerdict independence;
  struct FamilyCheck {
    VarSet removed;  // variables collapsed over
    VarSet effect;
    bool verdict;
    double delta_residual;
    double vanish_residual;
  };
  std::vector<FamilyCheck> checks;
  bool strict_collapse = false;
  bool equivalence_ok = false;
};
SuiteResult independence_collapse_suite(const Table& t, const Partition& part, IndepMode mode);

/// Splits the interaction of L within the AB margin into a B-margin part and
/// a part computed from the conditional distribution of A given B alone. The
/// two pieces must add back to lambda_L^{AB}; the conditional part vanishes
/// when A is independent of some pivot v in L given the rest of B.
struct Decomposition {
  VarSet effect;
  std::vector<int> levels;
  std::vector<double> margin_term;       // from log p_B
  std::vector<double> conditional_term;  // from log p_{A|B}
  std::vector<double> total;             // lambda_L^{AB}
  double additivity_residual = 0.0;
};
Decomposition decompose_interaction(const Table& t, VarSet L, VarSet A, VarSet B);

/// Collapsibility over a removed group R onto the rest, guaranteed for
/// effects containing the pivot v when X_R is independent of X_v given the
/// remaining variables. Effects without the pivot are reported, not asserted.
struct ConditionalCollapseReport {
  bool premise = false;
  IndependenceVerdict premise_detail;
  int pivot = -1;
  VarSet removed;
  std::vector<EffectResidual> asserted;  // effects containing the pivot
  std::vector<EffectResidual> reported;  // other effects of the kept margin
  bool verdict = false;
};
ConditionalCollapseReport conditional_collapse_check(const Table& t, VarSet R, int pivot);

}  // namespace mll

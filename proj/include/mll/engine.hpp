#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "mll/table.hpp"
#include "mll/transform.hpp"

namespace mll {

/// One interaction effect L evaluated within a margin M, L subset of M.
struct EffectMargin {
  VarSet effect;
  VarSet margin;
  auto operator<=>(const EffectMargin&) const = default;
};

/// A collection of marginal log-linear parameter tables, one dense value
/// tensor per (effect, margin) pair.
class MllSet {
 public:
  struct Entry {
    VarSet effect;
    VarSet margin;
    std::vector<int> levels;     // levels of the effect variables
    std::vector<double> values;  // row-major over the effect cells
  };

  void add(Entry e);
  const Entry* find(VarSet L, VarSet M) const;
  const Entry& at(VarSet L, VarSet M) const;  // throws EffectAbsent
  double value(VarSet L, VarSet M, std::span<const int> x_L) const;
  double& value_mut(VarSet L, VarSet M, std::span<const int> x_L);

  const std::vector<Entry>& entries() const { return entries_; }

  /// Restriction to the non-redundant cells (the last level of every effect
  /// variable dropped); the zero-sum constraints determine the rest.
  MllSet nonredundant() const;

  /// Total number of stored values; optionally skip the empty effect.
  std::size_t value_count(bool include_empty_effect = true) const;

 private:
  std::vector<Entry> entries_;  // sorted by (margin, effect) card-then-lex
};

/// Mean of log p_M over the fiber of the M-margin agreeing with x on L.
double nu(const Table& t, VarSet L, VarSet M, std::span<const int> x_L);

/// Marginal log-linear parameter of effect L within margin M (effect coding).
double lambda(const Table& t, VarSet L, VarSet M, std::span<const int> x_L);

enum class LambdaMethod { mobius, indicator, binary_sign };

/// The same parameter through an alternative formula, for cross-checking.
double lambda_crosscheck(const Table& t, VarSet L, VarSet M, std::span<const int> x_L,
                         LambdaMethod method);

/// All parameters of margin M: every effect L within M at every cell.
/// Guarantees sum_{L in M} lambda_L(x_L) = log p_M(x) cell by cell.
MllSet expand_log_linear(const Table& t, VarSet M, Execution exec = Execution::Auto);

/// Max over x_{L minus v} of |sum over levels of v of lambda_L^M|; a
/// conforming parameter set keeps this at roundoff level.
double zero_sum_residual(const MllSet& set, VarSet L, VarSet M, int v);

/// Alternating and cumulative transforms on a subset lattice, values indexed
/// by bitmask over an n-element ground set (size must be 2^n). The two are
/// mutually inverse.
std::vector<double> mobius_forward(std::span<const double> values_by_mask);
std::vector<double> mobius_inverse(std::span<const double> values_by_mask);

/// Map-based variants that verify every subset of `ground` is present.
std::vector<double> mobius_forward(const std::map<std::uint32_t, double>& values, VarSet ground);
std::vector<double> mobius_inverse(const std::map<std::uint32_t, double>& values, VarSet ground);

/// Two aggregates of parameters of margin M at a full margin cell x_M:
/// the sum over effects A with L subset A subset M, and the signed sum
/// (-1)^|L| over effects within M minus L. Both are reported; they are not
/// asserted equal (the identity claimed for them fails on easy cases, e.g.
/// a uniform binary margin with L = M).
struct IntervalSumSides {
  double upper;              // sum_{L subset A subset M} lambda_A(x_A)
  double signed_complement;  // (-1)^|L| sum_{B subset M minus L} lambda_B(x_B)
};
IntervalSumSides interval_sum_sides(const Table& t, VarSet L, VarSet M, std::span<const int> x_M);

/// Compares cumulative parameter sums of a nested margin pair N within M and
/// verifies that aggregate equality forces termwise equality. Both sums run
/// over the nonempty subsets of L (the normalizing constants of two margins
/// legitimately differ).
struct MarginAgreement {
  bool aggregate = false;          // nonempty-subset sums agree at all x_L
  bool termwise = false;           // each lambda_{L'} agrees, nonempty L'
  bool contradiction = false;      // aggregate held but termwise failed
  double aggregate_residual = 0.0;
  double termwise_residual = 0.0;
};
MarginAgreement check_margin_agreement(const Table& t, VarSet L, VarSet N, VarSet M);

}  // namespace mll

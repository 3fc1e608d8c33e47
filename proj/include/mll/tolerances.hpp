#pragma once

#include <algorithm>
#include <cmath>

#include "mll/varset.hpp"

namespace mll::tol {

/// Absolute positivity floor for table weights.
inline constexpr double eps_pos = 1e-12;

/// Normalization checks (distributions summing to one).
inline constexpr double tau_norm = 1e-10;

/// Parameter-equality checks: relative with an absolute floor.
inline constexpr double tau_eq_rel = 1e-8;
inline constexpr double tau_eq_abs = 1e-10;

/// Absolute threshold for "this interaction vanishes" on the log scale.
inline constexpr double tau_zero = 1e-8;

/// Internal-equivalence assertions tolerate residual disagreement up to this.
inline constexpr double tau_breach = 1e-7;  // 10 * tau_zero

inline bool param_eq(double a, double b) {
  double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= std::max(tau_eq_abs, tau_eq_rel * scale);
}

/// Verdict tolerance for a collapsibility residual over effect L: the
/// alternating sum has 2^|L| terms, so roundoff scales with the term count.
inline double collapse_tol(VarSet effect) {
  return tau_zero * static_cast<double>(std::uint64_t{1} << effect.size());
}

}  // namespace mll::tol

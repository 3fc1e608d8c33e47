#pragma once

#include <span>

#include "mll/table.hpp"

namespace mll::ref {

// Serial reference implementations that follow the defining formulas term by
// term. They are the ground truth the fast lattice kernels are tested
// against, and the evaluation path for single-value queries.

/// Mean of log p_M over the cells of the M-margin that agree with x on L.
/// L may be empty (grand mean); L == M gives log p_M(x).
double nu(const Table& t, VarSet L, VarSet M, std::span<const int> x_L);

/// Effect-coded interaction of L within margin M: the alternating sum of
/// nu over all subsets of L.
double lambda(const Table& t, VarSet L, VarSet M, std::span<const int> x_L);

/// Same value through the indicator-product form:
/// (1/|X_M|) * sum_y log p_M(y) * prod_{v in L} (|X_v|*[x_v == y_v] - 1).
double lambda_indicator(const Table& t, VarSet L, VarSet M, std::span<const int> x_L);

/// Binary-margin cross-check: 2^-|M| * sum_y (-1)^{|y_L|} log p_M(y) equals
/// lambda at the all-zeros cell; a general cell flips the sign by
/// (-1)^{|x_L|}. Requires every variable in M to be binary.
double lambda_binary_sign(const Table& t, VarSet L, VarSet M, std::span<const int> x_L);

}  // namespace mll::ref

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>

#include "mll/parallel.hpp"
#include "mll/table.hpp"

namespace mll {

/// Fiber means and effect-coded components of a value tensor, for every
/// sub-effect of a margin at once.
///
/// The tensor is embedded in an augmented grid with one extra "summed out"
/// slot per axis. A sweep per axis fills the mean slots (nu), a second sweep
/// of per-axis differences turns means into zero-sum interaction components
/// (lambda). Both sweeps are data-parallel across entries, which is where
/// OpenMP is applied for large tensors; the serial reference implementations
/// in mll::ref compute the same quantities straight from their definitions.
class LatticeTransform {
 public:
  /// Transform of log p_M for a margin M of `t`.
  static LatticeTransform log_margin(const Table& t, VarSet M, Execution exec = Execution::Auto);

  /// Transform of an arbitrary value tensor over the given variables
  /// (row-major, last variable fastest).
  static LatticeTransform of_values(std::vector<int> var_ids, std::vector<int> levels,
                                    std::span<const double> values,
                                    Execution exec = Execution::Auto);

  VarSet vars() const { return vars_; }
  const std::vector<int>& levels() const { return levels_; }

  /// Mean of the tensor over the fiber agreeing with x on E. E empty gives
  /// the grand mean; E = vars() gives the entry itself.
  double nu(VarSet E, std::span<const int> x_E) const;

  /// Zero-sum interaction component of E at x_E (alternating sum of nu over
  /// the subsets of E).
  double lambda(VarSet E, std::span<const int> x_E) const;

  /// Margin table when built via log_margin.
  const Table& margin() const;

  /// Visit every (effect, cell) pair of the lattice; effects in
  /// cardinality-then-lexicographic order, cells row-major.
  void for_each_effect(
      const std::function<void(VarSet, const Cell&, double nu, double lambda)>& f) const;

 private:
  LatticeTransform() = default;
  void build(std::span<const double> values, Execution exec);
  std::size_t slot_index(VarSet E, std::span<const int> x_E) const;

  VarSet vars_;
  std::vector<int> levels_;      // concrete levels per axis
  std::vector<std::size_t> aug_strides_;
  std::size_t aug_total_ = 1;
  std::vector<double> nu_;       // augmented tensor of fiber means
  std::vector<double> lam_;      // augmented tensor of interaction components
  std::shared_ptr<const Table> margin_;
};

}  // namespace mll

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mll/varset.hpp"

namespace mll {

/// Cell coordinates, one level index per variable of some ascending variable
/// list.
using Cell = std::vector<int>;

/// Row-major shape over an ascending variable list; the last variable moves
/// fastest.
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<int> levels);

  const std::vector<int>& levels() const { return levels_; }
  std::size_t total() const { return total_; }
  std::size_t rank() const { return levels_.size(); }

  std::size_t flat(std::span<const int> cell) const;
  Cell unflat(std::size_t idx) const;

  /// Row-major enumeration of all cells.
  template <class F>
  void for_each_cell(F&& f) const {
    Cell c(levels_.size(), 0);
    for (std::size_t i = 0; i < total_; ++i) {
      f(static_cast<const Cell&>(c), i);
      for (int d = static_cast<int>(levels_.size()) - 1; d >= 0; --d) {
        if (++c[d] < levels_[d]) break;
        c[d] = 0;
      }
    }
  }

 private:
  std::vector<int> levels_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 1;
};

/// Project a cell given over variable set `from` onto `to` (ascending index
/// order on both sides); `to` must be a subset of `from`.
Cell project_cell(std::span<const int> cell, VarSet from, VarSet to);

/// A strictly positive probability distribution on a contingency table.
/// Variables keep their global indices across marginalization, so effect and
/// margin sets always refer to the same universe. Immutable once built.
class Table {
 public:
  Table(std::vector<int> var_ids, std::vector<int> levels, std::vector<double> probs,
        double original_total, std::vector<std::string> names = {});

  VarSet vars() const { return vars_; }
  const std::vector<int>& var_ids() const { return var_ids_; }
  const std::vector<int>& levels() const { return shape_.levels(); }
  const std::vector<std::string>& names() const { return names_; }
  const Shape& shape() const { return shape_; }
  std::size_t cell_count() const { return shape_.total(); }

  int level_of(int var) const;
  std::vector<int> levels_of(VarSet sub) const;
  std::vector<std::string> names_of(VarSet sub) const;

  double p(std::size_t flat) const { return probs_[flat]; }
  double p(std::span<const int> cell) const { return probs_[shape_.flat(cell)]; }
  std::span<const double> probs() const { return probs_; }

  /// Sum of the raw input weights before normalization.
  double original_total() const { return original_total_; }

 private:
  std::vector<int> var_ids_;
  std::vector<std::string> names_;
  VarSet vars_;
  Shape shape_;
  std::vector<double> probs_;
  double original_total_ = 1.0;
};

/// Normalizes strictly positive weights into a Table over variables 0..n-1.
Table build_table(const std::vector<int>& levels, const std::vector<double>& weights,
                  std::vector<std::string> names = {});

/// Marginal distribution over M (a nonempty subset of the table's variables).
Table marginalize(const Table& t, VarSet M);

/// Conditional distribution of the target variables given each cell of the
/// conditioning variables.
class ConditionalSlice {
 public:
  ConditionalSlice(const Table& t, VarSet target, VarSet given);

  VarSet target() const { return target_; }
  VarSet given() const { return given_; }
  const Shape& target_shape() const { return target_shape_; }
  const Shape& given_shape() const { return given_shape_; }

  double p(std::span<const int> x_target, std::span<const int> x_given) const;
  double log_p(std::span<const int> x_target, std::span<const int> x_given) const;

  /// One normalized distribution over the target cells.
  std::span<const double> slice(std::span<const int> x_given) const;

 private:
  VarSet target_, given_;
  Shape target_shape_, given_shape_;
  std::vector<double> probs_;  // [given-cell][target-cell], row-major
};

ConditionalSlice condition(const Table& t, VarSet A, VarSet B);

}  // namespace mll

#include "mll/table.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "mll/errors.hpp"
#include "mll/tolerances.hpp"

namespace mll {

Shape::Shape(std::vector<int> levels) : levels_(std::move(levels)) {
  strides_.assign(levels_.size(), 1);
  for (int i = static_cast<int>(levels_.size()) - 2; i >= 0; --i)
    strides_[i] = strides_[i + 1] * static_cast<std::size_t>(levels_[i + 1]);
  total_ = 1;
  for (int l : levels_) total_ *= static_cast<std::size_t>(l);
}

std::size_t Shape::flat(std::span<const int> cell) const {
  assert(cell.size() == levels_.size());
  std::size_t idx = 0;
  for (std::size_t i = 0; i < cell.size(); ++i) {
    assert(cell[i] >= 0 && cell[i] < levels_[i]);
    idx += strides_[i] * static_cast<std::size_t>(cell[i]);
  }
  return idx;
}

Cell Shape::unflat(std::size_t idx) const {
  Cell c(levels_.size());
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    c[i] = static_cast<int>(idx / strides_[i]);
    idx %= strides_[i];
  }
  return c;
}

Cell project_cell(std::span<const int> cell, VarSet from, VarSet to) {
  assert(to.subset_of(from));
  Cell out;
  out.reserve(to.size());
  int pos = 0;
  from.for_each([&](int v) {
    if (to.contains(v)) out.push_back(cell[pos]);
    ++pos;
  });
  return out;
}

Table::Table(std::vector<int> var_ids, std::vector<int> levels, std::vector<double> probs,
             double original_total, std::vector<std::string> names)
    : var_ids_(std::move(var_ids)),
      names_(std::move(names)),
      shape_(std::move(levels)),
      probs_(std::move(probs)),
      original_total_(original_total) {
  vars_ = VarSet::of(var_ids_);
  if (names_.empty())
    for (int v : var_ids_) names_.push_back(std::to_string(v + 1));
  if (vars_.size() != static_cast<int>(var_ids_.size()))
    fail(errc::shape_mismatch, "duplicate variable ids");
  if (!std::is_sorted(var_ids_.begin(), var_ids_.end()))
    fail(errc::shape_mismatch, "variable ids must be ascending");
  for (int l : shape_.levels())
    if (l < 2) fail(errc::shape_mismatch, "every variable needs at least 2 levels");
  if (probs_.size() != shape_.total())
    fail(errc::shape_mismatch, "probability count does not match the shape");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p > tol::eps_pos)) fail(errc::positivity_violation, "cell probability not positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol::tau_norm)
    fail(errc::shape_mismatch, "probabilities do not sum to one");
}

int Table::level_of(int var) const {
  for (std::size_t i = 0; i < var_ids_.size(); ++i)
    if (var_ids_[i] == var) return shape_.levels()[i];
  fail(errc::not_a_subset, "variable " + std::to_string(var + 1) + " not in table");
}

std::vector<int> Table::levels_of(VarSet sub) const {
  if (!sub.subset_of(vars_)) fail(errc::not_a_subset, "variables not in table");
  std::vector<int> out;
  out.reserve(sub.size());
  sub.for_each([&](int v) { out.push_back(level_of(v)); });
  return out;
}

std::vector<std::string> Table::names_of(VarSet sub) const {
  std::vector<std::string> out;
  sub.for_each([&](int v) {
    for (std::size_t i = 0; i < var_ids_.size(); ++i)
      if (var_ids_[i] == v) out.push_back(names_[i]);
  });
  return out;
}

Table build_table(const std::vector<int>& levels, const std::vector<double>& weights,
                  std::vector<std::string> names) {
  std::size_t expect = 1;
  for (int l : levels) {
    if (l < 2) fail(errc::shape_mismatch, "every variable needs at least 2 levels");
    expect *= static_cast<std::size_t>(l);
  }
  if (weights.size() != expect)
    fail(errc::shape_mismatch, "expected " + std::to_string(expect) + " weights, got " +
                                   std::to_string(weights.size()));
  double total = 0.0;
  for (double w : weights) {
    if (!(w > tol::eps_pos)) fail(errc::positivity_violation, "weights must be strictly positive");
    total += w;
  }
  std::vector<double> probs(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) probs[i] = weights[i] / total;
  std::vector<int> ids(levels.size());
  std::iota(ids.begin(), ids.end(), 0);
  return Table(std::move(ids), levels, std::move(probs), total, std::move(names));
}

Table marginalize(const Table& t, VarSet M) {
  if (!M.subset_of(t.vars()) || M.empty())
    fail(errc::not_a_subset, "margin " + M.to_string() + " not a nonempty subset of " +
                                 t.vars().to_string());
  if (M == t.vars())
    return t;

  const VarSet removed = t.vars() - M;
  Shape out_shape(t.levels_of(M));
  Shape rem_shape(t.levels_of(removed));

  // Positions of kept/removed variables within the source cell.
  std::vector<int> keep_pos, rem_pos;
  int pos = 0;
  t.vars().for_each([&](int v) {
    (M.contains(v) ? keep_pos : rem_pos).push_back(pos);
    ++pos;
  });

  std::vector<double> out(out_shape.total(), 0.0);
  Cell full(t.shape().rank());
  out_shape.for_each_cell([&](const Cell& oc, std::size_t oi) {
    for (std::size_t i = 0; i < keep_pos.size(); ++i) full[keep_pos[i]] = oc[i];
    double sum = 0.0;
    rem_shape.for_each_cell([&](const Cell& rc, std::size_t) {
      for (std::size_t i = 0; i < rem_pos.size(); ++i) full[rem_pos[i]] = rc[i];
      sum += t.p(full);
    });
    out[oi] = sum;
  });

  return Table(M.ids(), out_shape.levels(), std::move(out), t.original_total(), t.names_of(M));
}

ConditionalSlice::ConditionalSlice(const Table& t, VarSet target, VarSet given)
    : target_(target), given_(given) {
  if (target.intersects(given)) fail(errc::overlapping_sets, "target and conditioning sets overlap");
  if (target.empty()) fail(errc::not_a_subset, "target set must be nonempty");
  if (!(target | given).subset_of(t.vars()))
    fail(errc::not_a_subset, "conditioning variables not in table");

  target_shape_ = Shape(t.levels_of(target));
  given_shape_ = Shape(given.empty() ? std::vector<int>{} : t.levels_of(given));

  const Table joint = marginalize(t, target | given);
  probs_.resize(given_shape_.total() * target_shape_.total());
  const VarSet both = target | given;
  given_shape_.for_each_cell([&](const Cell& gc, std::size_t gi) {
    double denom = 0.0;
    std::vector<double> row(target_shape_.total());
    target_shape_.for_each_cell([&](const Cell& tc, std::size_t ti) {
      Cell joint_cell(both.size());
      int pos = 0, tpos = 0, gpos = 0;
      both.for_each([&](int v) {
        joint_cell[pos++] = target.contains(v) ? tc[tpos++] : gc[gpos++];
      });
      row[ti] = joint.p(joint_cell);
      denom += row[ti];
    });
    for (std::size_t ti = 0; ti < row.size(); ++ti)
      probs_[gi * target_shape_.total() + ti] = row[ti] / denom;
  });
}

double ConditionalSlice::p(std::span<const int> x_target, std::span<const int> x_given) const {
  return probs_[given_shape_.flat(x_given) * target_shape_.total() + target_shape_.flat(x_target)];
}

double ConditionalSlice::log_p(std::span<const int> x_target, std::span<const int> x_given) const {
  return std::log(p(x_target, x_given));
}

std::span<const double> ConditionalSlice::slice(std::span<const int> x_given) const {
  return {probs_.data() + given_shape_.flat(x_given) * target_shape_.total(),
          target_shape_.total()};
}

ConditionalSlice condition(const Table& t, VarSet A, VarSet B) { return ConditionalSlice(t, A, B); }

}  // namespace mll

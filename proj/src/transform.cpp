#include "mll/transform.hpp"

#include <cassert>
#include <cmath>

#include "mll/errors.hpp"

namespace mll {

LatticeTransform LatticeTransform::log_margin(const Table& t, VarSet M, Execution exec) {
  if (!M.subset_of(t.vars()) || M.empty())
    fail(errc::not_a_subset, "margin " + M.to_string() + " not a nonempty subset of " +
                                 t.vars().to_string());
  auto margin = std::make_shared<Table>(marginalize(t, M));
  std::vector<double> logs(margin->cell_count());
  const auto probs = margin->probs();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(logs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (use_parallel(exec, logs.size()))
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) logs[i] = std::log(probs[i]);

  LatticeTransform out;
  out.vars_ = M;
  out.levels_ = margin->levels();
  out.margin_ = std::move(margin);
  out.build(logs, exec);
  return out;
}

LatticeTransform LatticeTransform::of_values(std::vector<int> var_ids, std::vector<int> levels,
                                             std::span<const double> values, Execution exec) {
  LatticeTransform out;
  out.vars_ = VarSet::of(var_ids);
  if (out.vars_.size() != static_cast<int>(var_ids.size()))
    fail(errc::shape_mismatch, "duplicate variable ids");
  out.levels_ = std::move(levels);
  std::size_t expect = 1;
  for (int l : out.levels_) expect *= static_cast<std::size_t>(l);
  if (values.size() != expect) fail(errc::shape_mismatch, "value count does not match the shape");
  out.build(values, exec);
  return out;
}

void LatticeTransform::build(std::span<const double> values, Execution exec) {
  const int rank = static_cast<int>(levels_.size());
  aug_strides_.assign(rank, 1);
  for (int i = rank - 2; i >= 0; --i)
    aug_strides_[i] = aug_strides_[i + 1] * static_cast<std::size_t>(levels_[i + 1] + 1);
  aug_total_ = 1;
  for (int l : levels_) aug_total_ *= static_cast<std::size_t>(l + 1);

  const bool par = use_parallel(exec, aug_total_);
  nu_.assign(aug_total_, 0.0);

  // Scatter the concrete entries into the augmented grid.
  {
    Shape base(levels_);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(base.total());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      std::size_t rem = static_cast<std::size_t>(i);
      std::size_t aug = 0;
      for (int d = rank - 1; d >= 0; --d) {
        aug += (rem % static_cast<std::size_t>(levels_[d])) * aug_strides_[d];
        rem /= static_cast<std::size_t>(levels_[d]);
      }
      nu_[aug] = values[i];
    }
  }

  // Mean sweep: per axis, fill the summed-out slot with the level average.
  // Entries whose slot set involves later axes get overwritten again in those
  // passes, so the final write of each entry reads only finished sources.
  for (int d = 0; d < rank; ++d) {
    const std::size_t stride = aug_strides_[d];
    const std::size_t axis = static_cast<std::size_t>(levels_[d] + 1);
    const std::size_t outer_total = aug_total_ / axis;
    const double inv = 1.0 / static_cast<double>(levels_[d]);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(outer_total);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
    for (std::ptrdiff_t o = 0; o < n; ++o) {
      const std::size_t outer = static_cast<std::size_t>(o);
      const std::size_t base = (outer / stride) * stride * axis + (outer % stride);
      double sum = 0.0;
      for (int c = 0; c < levels_[d]; ++c) sum += nu_[base + static_cast<std::size_t>(c) * stride];
      nu_[base + static_cast<std::size_t>(levels_[d]) * stride] = sum * inv;
    }
  }

  // Difference sweep: subtracting the summed-out slot along every axis turns
  // fiber means into zero-sum components.
  lam_ = nu_;
  for (int d = 0; d < rank; ++d) {
    const std::size_t stride = aug_strides_[d];
    const std::size_t axis = static_cast<std::size_t>(levels_[d] + 1);
    const std::size_t outer_total = aug_total_ / axis;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(outer_total);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
    for (std::ptrdiff_t o = 0; o < n; ++o) {
      const std::size_t outer = static_cast<std::size_t>(o);
      const std::size_t base = (outer / stride) * stride * axis + (outer % stride);
      const double mean = lam_[base + static_cast<std::size_t>(levels_[d]) * stride];
      for (int c = 0; c < levels_[d]; ++c) lam_[base + static_cast<std::size_t>(c) * stride] -= mean;
    }
  }
}

std::size_t LatticeTransform::slot_index(VarSet E, std::span<const int> x_E) const {
  if (!E.subset_of(vars_))
    fail(errc::not_nested, "effect " + E.to_string() + " not within " + vars_.to_string());
  assert(static_cast<int>(x_E.size()) == E.size());
  std::size_t idx = 0;
  int pos = 0, epos = 0;
  vars_.for_each([&](int v) {
    const int coord = E.contains(v) ? x_E[epos++] : levels_[pos];
    assert(coord >= 0 && coord <= levels_[pos]);
    idx += static_cast<std::size_t>(coord) * aug_strides_[pos];
    ++pos;
  });
  return idx;
}

double LatticeTransform::nu(VarSet E, std::span<const int> x_E) const {
  return nu_[slot_index(E, x_E)];
}

double LatticeTransform::lambda(VarSet E, std::span<const int> x_E) const {
  return lam_[slot_index(E, x_E)];
}

const Table& LatticeTransform::margin() const {
  if (!margin_) fail(errc::spec_invalid, "transform was not built from a table margin");
  return *margin_;
}

void LatticeTransform::for_each_effect(
    const std::function<void(VarSet, const Cell&, double, double)>& f) const {
  for (VarSet E : subsets_sorted(vars_)) {
    std::vector<int> e_levels;
    int pos = 0;
    vars_.for_each([&](int v) {
      if (E.contains(v)) e_levels.push_back(levels_[pos]);
      ++pos;
    });
    Shape es(e_levels);
    es.for_each_cell([&](const Cell& c, std::size_t) {
      const std::size_t idx = slot_index(E, c);
      f(E, c, nu_[idx], lam_[idx]);
    });
  }
}

}  // namespace mll

#include "mll/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mll/errors.hpp"
#include "mll/reference.hpp"
#include "mll/tolerances.hpp"

namespace mll {

namespace {

bool entry_less(const MllSet::Entry& a, const MllSet::Entry& b) {
  auto key = [](const MllSet::Entry& e) {
    return std::tuple(e.margin.size(), e.margin.ids(), e.effect.size(), e.effect.ids());
  };
  return key(a) < key(b);
}

void require_nested(const Table& t, VarSet L, VarSet M) {
  if (!M.subset_of(t.vars()))
    fail(errc::not_nested, "margin " + M.to_string() + " not within " + t.vars().to_string());
  if (!L.subset_of(M))
    fail(errc::not_nested, "effect " + L.to_string() + " not within margin " + M.to_string());
}

}  // namespace

void MllSet::add(Entry e) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), e, entry_less);
  entries_.insert(it, std::move(e));
}

const MllSet::Entry* MllSet::find(VarSet L, VarSet M) const {
  for (const Entry& e : entries_)
    if (e.effect == L && e.margin == M) return &e;
  return nullptr;
}

const MllSet::Entry& MllSet::at(VarSet L, VarSet M) const {
  const Entry* e = find(L, M);
  if (!e)
    fail(errc::effect_absent,
         "no entry for effect " + L.to_string() + " within margin " + M.to_string());
  return *e;
}

double MllSet::value(VarSet L, VarSet M, std::span<const int> x_L) const {
  const Entry& e = at(L, M);
  return e.values[Shape(e.levels).flat(x_L)];
}

double& MllSet::value_mut(VarSet L, VarSet M, std::span<const int> x_L) {
  for (Entry& e : entries_)
    if (e.effect == L && e.margin == M) return e.values[Shape(e.levels).flat(x_L)];
  fail(errc::effect_absent,
       "no entry for effect " + L.to_string() + " within margin " + M.to_string());
}

MllSet MllSet::nonredundant() const {
  MllSet out;
  for (const Entry& e : entries_) {
    Entry r;
    r.effect = e.effect;
    r.margin = e.margin;
    for (int l : e.levels) r.levels.push_back(l - 1);
    if (std::any_of(r.levels.begin(), r.levels.end(), [](int l) { return l == 0; })) {
      // A binary variable keeps no free cell of its own; the entry reduces
      // to the cells where every coordinate stays below the last level.
    }
    Shape full(e.levels);
    full.for_each_cell([&](const Cell& c, std::size_t i) {
      for (std::size_t d = 0; d < c.size(); ++d)
        if (c[d] >= e.levels[d] - 1) return;
      r.values.push_back(e.values[i]);
    });
    std::size_t expect = 1;
    for (int l : r.levels) expect *= static_cast<std::size_t>(l);
    if (r.values.size() != expect) fail(errc::shape_mismatch, "nonredundant restriction mismatch");
    out.add(std::move(r));
  }
  return out;
}

std::size_t MllSet::value_count(bool include_empty_effect) const {
  std::size_t n = 0;
  for (const Entry& e : entries_) {
    if (!include_empty_effect && e.effect.empty()) continue;
    n += e.values.size();
  }
  return n;
}

double nu(const Table& t, VarSet L, VarSet M, std::span<const int> x_L) {
  return ref::nu(t, L, M, x_L);
}

double lambda(const Table& t, VarSet L, VarSet M, std::span<const int> x_L) {
  return ref::lambda(t, L, M, x_L);
}

double lambda_crosscheck(const Table& t, VarSet L, VarSet M, std::span<const int> x_L,
                         LambdaMethod method) {
  switch (method) {
    case LambdaMethod::mobius: return ref::lambda(t, L, M, x_L);
    case LambdaMethod::indicator: return ref::lambda_indicator(t, L, M, x_L);
    case LambdaMethod::binary_sign: return ref::lambda_binary_sign(t, L, M, x_L);
  }
  fail(errc::usage, "unknown lambda method");
}

MllSet expand_log_linear(const Table& t, VarSet M, Execution exec) {
  if (!M.subset_of(t.vars()) || M.empty())
    fail(errc::not_a_subset, "margin " + M.to_string() + " not a nonempty subset of " +
                                 t.vars().to_string());
  const LatticeTransform lt = LatticeTransform::log_margin(t, M, exec);
  MllSet out;
  std::vector<MllSet::Entry> staged;
  lt.for_each_effect([&](VarSet E, const Cell&, double, double lam) {
    if (staged.empty() || staged.back().effect != E) {
      staged.push_back({E, M, {}, {}});
      int pos = 0;
      lt.vars().for_each([&](int v) {
        if (E.contains(v)) staged.back().levels.push_back(lt.levels()[pos]);
        ++pos;
      });
    }
    staged.back().values.push_back(lam);
  });
  for (auto& e : staged) out.add(std::move(e));
  return out;
}

double zero_sum_residual(const MllSet& set, VarSet L, VarSet M, int v) {
  if (!L.contains(v)) fail(errc::effect_absent, "variable not part of the effect");
  const MllSet::Entry& e = set.at(L, M);

  int v_pos = 0;
  {
    int pos = 0;
    L.for_each([&](int u) {
      if (u == v) v_pos = pos;
      ++pos;
    });
  }
  const Shape shape(e.levels);
  double worst = 0.0;
  // Enumerate cells with the v coordinate pinned to zero, then sum over it.
  shape.for_each_cell([&](const Cell& c, std::size_t) {
    if (c[v_pos] != 0) return;
    Cell probe = c;
    double sum = 0.0;
    for (int lv = 0; lv < e.levels[v_pos]; ++lv) {
      probe[v_pos] = lv;
      sum += e.values[shape.flat(probe)];
    }
    worst = std::max(worst, std::abs(sum));
  });
  return worst;
}

namespace {

int lattice_rank(std::size_t n) {
  if (n == 0 || (n & (n - 1)) != 0)
    fail(errc::shape_mismatch, "subset-lattice input size must be a power of two");
  return std::countr_zero(n);
}

std::vector<double> flatten_checked(const std::map<std::uint32_t, double>& values, VarSet ground) {
  const std::size_t n = std::size_t{1} << ground.size();
  std::vector<double> flat(n);
  // Dense order: submask bits compacted onto 0..k-1.
  const std::vector<int> ids = ground.ids();
  for (std::uint32_t dense = 0; dense < n; ++dense) {
    std::uint32_t mask = 0;
    for (std::size_t b = 0; b < ids.size(); ++b)
      if ((dense >> b) & 1u) mask |= std::uint32_t{1} << ids[b];
    auto it = values.find(mask);
    if (it == values.end())
      fail(errc::missing_subset, "no value for subset " + VarSet(mask).to_string());
    flat[dense] = it->second;
  }
  return flat;
}

}  // namespace

std::vector<double> mobius_forward(std::span<const double> values_by_mask) {
  std::vector<double> f(values_by_mask.begin(), values_by_mask.end());
  const int k = lattice_rank(f.size());
  for (int b = 0; b < k; ++b)
    for (std::size_t m = 0; m < f.size(); ++m)
      if ((m >> b) & 1u) f[m] -= f[m ^ (std::size_t{1} << b)];
  return f;
}

std::vector<double> mobius_inverse(std::span<const double> values_by_mask) {
  std::vector<double> f(values_by_mask.begin(), values_by_mask.end());
  const int k = lattice_rank(f.size());
  for (int b = 0; b < k; ++b)
    for (std::size_t m = 0; m < f.size(); ++m)
      if ((m >> b) & 1u) f[m] += f[m ^ (std::size_t{1} << b)];
  return f;
}

std::vector<double> mobius_forward(const std::map<std::uint32_t, double>& values, VarSet ground) {
  return mobius_forward(flatten_checked(values, ground));
}

std::vector<double> mobius_inverse(const std::map<std::uint32_t, double>& values, VarSet ground) {
  return mobius_inverse(flatten_checked(values, ground));
}

IntervalSumSides interval_sum_sides(const Table& t, VarSet L, VarSet M, std::span<const int> x_M) {
  require_nested(t, L, M);
  const LatticeTransform lt = LatticeTransform::log_margin(t, M);
  IntervalSumSides out{0.0, 0.0};
  for (VarSet A : supersets_within(L, M)) {
    const Cell x_A = project_cell(x_M, M, A);
    out.upper += lt.lambda(A, x_A);
  }
  const VarSet N = M - L;
  const double sign = (L.size() % 2 == 0) ? 1.0 : -1.0;
  for (VarSet B : subsets_sorted(N)) {
    const Cell x_B = project_cell(x_M, M, B);
    out.signed_complement += lt.lambda(B, x_B);
  }
  out.signed_complement *= sign;
  return out;
}

MarginAgreement check_margin_agreement(const Table& t, VarSet L, VarSet N, VarSet M) {
  if (!(L.subset_of(N) && N.strict_subset_of(M) && M.subset_of(t.vars())))
    fail(errc::not_nested, "need L within N strictly within M within the table");

  const LatticeTransform big = LatticeTransform::log_margin(t, M);
  const LatticeTransform small = LatticeTransform::log_margin(t, N);

  MarginAgreement out;
  const Shape l_shape(L.empty() ? std::vector<int>{} : t.levels_of(L));
  // The empty effect is excluded throughout: the two normalizing constants
  // differ whenever the margins do, and the equivalence concerns the
  // interaction terms only.
  l_shape.for_each_cell([&](const Cell& x_L, std::size_t) {
    double sum_m = 0.0, sum_n = 0.0;
    for (VarSet sub : subsets_sorted(L)) {
      if (sub.empty()) continue;
      const Cell x_sub = project_cell(x_L, L, sub);
      sum_m += big.lambda(sub, x_sub);
      sum_n += small.lambda(sub, x_sub);
      out.termwise_residual = std::max(
          out.termwise_residual, std::abs(big.lambda(sub, x_sub) - small.lambda(sub, x_sub)));
    }
    out.aggregate_residual = std::max(out.aggregate_residual, std::abs(sum_m - sum_n));
  });

  out.aggregate = out.aggregate_residual <= tol::collapse_tol(L);
  out.termwise = out.termwise_residual <= tol::collapse_tol(L);
  out.contradiction = out.aggregate && !out.termwise;
  return out;
}

}  // namespace mll

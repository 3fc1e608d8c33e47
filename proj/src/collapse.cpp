#include "mll/collapse.hpp"

#include <cmath>

#include "mll/errors.hpp"
#include "mll/reference.hpp"
#include "mll/tolerances.hpp"

namespace mll {

namespace {

constexpr int kStrictEnumerationLimit = 6;  // exhaustive 2^|N| effect scans

void validate_query(const CollapseQuery& q, const Table& t) {
  if (!q.super.subset_of(t.vars()))
    fail(errc::not_nested, "outer margin " + q.super.to_string() + " not within the table");
  if (q.margin == q.super)
    fail(errc::not_strictly_nested, "condensed margin equals the outer margin");
  if (!q.margin.strict_subset_of(q.super))
    fail(errc::not_nested, "margin " + q.margin.to_string() + " not strictly within " +
                               q.super.to_string());
  if (!q.effect.subset_of(q.margin))
    fail(errc::not_nested, "effect " + q.effect.to_string() + " not within margin " +
                               q.margin.to_string());
  if (q.strict && q.effect.empty())
    fail(errc::not_nested, "strict collapsibility needs a nonempty effect");
  if (q.strict && q.super.size() > kStrictEnumerationLimit)
    fail(errc::query_too_large, "strict checks enumerate all effects of the outer margin; at most " +
                                    std::to_string(kStrictEnumerationLimit) + " variables supported");
  if (q.common) {
    if (!q.common->subset_of(q.effect))
      fail(errc::not_nested, "common core " + q.common->to_string() + " not within the effect");
    if (q.common->empty() || q.common->size() > q.margin.size())
      fail(errc::spec_invalid, "common core size must be between 1 and the margin size");
  }
}

struct Ctx {
  const Table& t;
  const CollapseQuery& q;
  LatticeTransform inner;   // log p_M
  LatticeTransform outer;   // log p_N
  LatticeTransform defect;  // d over the M variables; nu() gives mean defects

  Ctx(const CollapseQuery& q_, const Table& t_)
      : t(t_),
        q(q_),
        inner(LatticeTransform::log_margin(t_, q_.margin)),
        outer(LatticeTransform::log_margin(t_, q_.super)),
        defect(make_defect(inner, outer, q_.margin)) {}

  static LatticeTransform make_defect(const LatticeTransform& inner, const LatticeTransform& outer,
                                      VarSet M) {
    const Table& pm = inner.margin();
    std::vector<double> d(pm.cell_count());
    pm.shape().for_each_cell([&](const Cell& c, std::size_t i) {
      d[i] = std::log(pm.p(i)) - outer.nu(M, c);
    });
    return LatticeTransform::of_values(M.ids(), pm.levels(), d);
  }

  double delta(VarSet Z, std::span<const int> x_Z) const {
    return inner.lambda(Z, x_Z) - outer.lambda(Z, x_Z);
  }

  Shape shape_of(VarSet s) const {
    return Shape(s.empty() ? std::vector<int>{} : t.levels_of(s));
  }
};

template <class F>
ResidualAt max_over_cells(const Shape& shape, VarSet over, F&& eval) {
  ResidualAt out;
  out.over = over;
  bool first = true;
  shape.for_each_cell([&](const Cell& c, std::size_t) {
    const double v = std::abs(eval(c));
    if (first || v > out.value) {
      out.value = v;
      out.at = c;
      first = false;
    }
  });
  return out;
}

/// The three single-effect conditions; fills the first section of the report.
void run_single_conditions(const Ctx& ctx, CollapseReport& rep) {
  const VarSet L = ctx.q.effect;
  const Shape l_shape = ctx.shape_of(L);

  rep.delta = max_over_cells(l_shape, L, [&](const Cell& x) { return ctx.delta(L, x); });

  rep.defect_gap = max_over_cells(l_shape, L, [&](const Cell& x) {
    double sub_deltas = 0.0;
    for (VarSet Z : subsets_sorted(L)) {
      if (Z == L) continue;
      sub_deltas += ctx.delta(Z, project_cell(x, L, Z));
    }
    return ctx.defect.nu(L, x) - sub_deltas;
  });

  rep.alternating = max_over_cells(l_shape, L, [&](const Cell& x) {
    double acc = 0.0;
    for (VarSet Z : subsets_sorted(L)) {
      const double sign = ((L.size() - Z.size()) % 2 == 0) ? 1.0 : -1.0;
      acc += sign * ctx.defect.nu(Z, project_cell(x, L, Z));
    }
    return acc;
  });

  rep.cond_delta = rep.delta.value <= rep.tolerance;
  rep.cond_gap = rep.defect_gap.value <= rep.tolerance;
  rep.cond_alternating = rep.alternating.value <= rep.tolerance;

  if (std::abs(rep.delta.value - rep.alternating.value) > tol::tau_breach ||
      std::abs(rep.delta.value - rep.defect_gap.value) > tol::tau_breach)
    throw EquivalenceBreach("single-effect collapsibility conditions disagree: delta=" +
                            std::to_string(rep.delta.value) +
                            " gap=" + std::to_string(rep.defect_gap.value) +
                            " alternating=" + std::to_string(rep.alternating.value));
}

/// Direct per-effect family checks plus the alternating mean-defect identity.
void run_family(const Ctx& ctx, CollapseReport& rep) {
  const VarSet L = ctx.q.effect;
  const VarSet S = *ctx.q.common;
  const Shape l_shape = ctx.shape_of(L);

  rep.family_direct_ok = true;
  for (VarSet A : supersets_within(S, L)) {
    const Shape a_shape = ctx.shape_of(A);
    ResidualAt r = max_over_cells(a_shape, A, [&](const Cell& x) { return ctx.delta(A, x); });
    const bool ok = r.value <= ctx.q.tol.value_or(tol::collapse_tol(A));
    rep.family.push_back({A, r.value, r.at, ok});
    rep.family_direct_ok = rep.family_direct_ok && ok;
  }

  rep.family_identity = max_over_cells(l_shape, L, [&](const Cell& x) {
    double acc = 0.0;
    for (VarSet R : subsets_sorted(S)) {
      const VarSet LR = L - R;
      const double sign = ((S.size() - R.size()) % 2 == 0) ? 1.0 : -1.0;
      acc += sign * ctx.defect.nu(LR, project_cell(x, L, LR));
    }
    return acc;
  });
  const double id_tol =
      ctx.q.tol.value_or(tol::collapse_tol(L) * static_cast<double>(std::size_t{1} << S.size()));
  rep.family_identity_ok = rep.family_identity.value <= id_tol;

  if (rep.family_direct_ok != rep.family_identity_ok)
    throw EquivalenceBreach(
        "family collapsibility: the alternating mean-defect identity and the direct per-effect "
        "checks disagree");
}

/// Vanishing of every interaction strictly above `base` that leaves the
/// condensed margin, checked per effect, by fiber-mean contrast, and by one
/// aggregated sum.
void run_vanish(const Ctx& ctx, CollapseReport& rep, VarSet base, bool assert_contrast) {
  const VarSet M = ctx.q.margin;
  const VarSet N = ctx.q.super;

  std::vector<VarSet> family;
  for (VarSet Z : subsets_sorted(N))
    if (base.strict_subset_of(Z) && !Z.subset_of(M)) family.push_back(Z);

  rep.vanish_ok = true;
  rep.vanish_worst.over = N;
  for (VarSet Z : family) {
    const Shape z_shape = ctx.shape_of(Z);
    ResidualAt r = max_over_cells(z_shape, Z, [&](const Cell& x) { return ctx.outer.lambda(Z, x); });
    const bool ok = r.value <= ctx.q.tol.value_or(tol::collapse_tol(Z));
    rep.vanish.push_back({Z, r.value, r.at, ok});
    rep.vanish_ok = rep.vanish_ok && ok;
    if (r.value > rep.vanish_worst.value) {
      rep.vanish_worst.value = r.value;
      rep.vanish_worst.at = r.at;
      rep.vanish_worst.over = Z;
    }
  }

  // Aggregated route: the family members are zero-sum components of distinct
  // effects, so their sum vanishes identically only when each one does.
  const Shape n_shape = ctx.shape_of(N);
  rep.vanish_aggregate = max_over_cells(n_shape, N, [&](const Cell& x) {
    double acc = 0.0;
    for (VarSet Z : family) acc += ctx.outer.lambda(Z, project_cell(x, N, Z));
    return acc;
  });
  const double agg_tol =
      ctx.q.tol.value_or(tol::tau_zero * static_cast<double>(std::max<std::size_t>(1, family.size())));
  rep.aggregate_ok = rep.vanish_aggregate.value <= agg_tol;

  // Fiber-mean contrast route over the outer margin: alternating sums of
  // fiber means padded by everything outside `base`, against padding by the
  // condensed complement only.
  const VarSet pad_outer = N - base;
  const VarSet pad_inner = M - base;
  rep.nu_contrast = max_over_cells(n_shape, N, [&](const Cell& x) {
    double acc = 0.0;
    for (VarSet Z : subsets_sorted(base)) {
      const double sign = ((base.size() - Z.size()) % 2 == 0) ? 1.0 : -1.0;
      const VarSet eo = Z | pad_outer;
      const VarSet ei = Z | pad_inner;
      acc += sign * (ctx.outer.nu(eo, project_cell(x, N, eo)) -
                     ctx.outer.nu(ei, project_cell(x, N, ei)));
    }
    return acc;
  });
  const double contrast_tol = ctx.q.tol.value_or(2.0 * tol::collapse_tol(base));
  rep.nu_contrast_ok = rep.nu_contrast.value <= contrast_tol;

  if (rep.vanish_ok != rep.aggregate_ok)
    throw EquivalenceBreach("vanishing family: aggregated sum disagrees with per-effect checks");
  if (assert_contrast && rep.vanish_ok != rep.nu_contrast_ok)
    throw EquivalenceBreach("vanishing family: fiber-mean contrast disagrees with per-effect checks");
}

}  // namespace

double margin_defect(const Table& t, VarSet M, VarSet N, std::span<const int> x_M) {
  if (M == N) fail(errc::not_strictly_nested, "defect needs a strictly larger outer margin");
  if (!M.strict_subset_of(N) || !N.subset_of(t.vars()))
    fail(errc::not_nested, "need M strictly within N within the table");
  const Table pm = marginalize(t, M);
  return std::log(pm.p(x_M)) - ref::nu(t, M, N, x_M);
}

double margin_defect_mean(const Table& t, VarSet Z, VarSet M, VarSet N, std::span<const int> x_Z) {
  if (M == N) fail(errc::not_strictly_nested, "defect needs a strictly larger outer margin");
  if (!(Z.subset_of(M) && M.strict_subset_of(N) && N.subset_of(t.vars())))
    fail(errc::not_nested, "need Z within M strictly within N within the table");

  // Route one: mean of the defect over the fiber above x_Z.
  const Table pm = marginalize(t, M);
  const VarSet rest = M - Z;
  const Shape rest_shape(rest.empty() ? std::vector<int>{} : t.levels_of(rest));
  std::vector<int> z_pos, rest_pos;
  int pos = 0;
  M.for_each([&](int v) {
    (Z.contains(v) ? z_pos : rest_pos).push_back(pos);
    ++pos;
  });
  Cell full(M.size());
  for (std::size_t i = 0; i < z_pos.size(); ++i) full[z_pos[i]] = x_Z[i];
  double sum = 0.0;
  rest_shape.for_each_cell([&](const Cell& rc, std::size_t) {
    for (std::size_t i = 0; i < rest_pos.size(); ++i) full[rest_pos[i]] = rc[i];
    sum += std::log(pm.p(full)) - ref::nu(t, M, N, full);
  });
  const double via_defect = sum / static_cast<double>(rest_shape.total());

  // Route two: difference of fiber means in the two margins.
  const double via_nu = ref::nu(t, Z, M, x_Z) - ref::nu(t, Z, N, x_Z);
  if (std::abs(via_defect - via_nu) > tol::tau_breach)
    throw EquivalenceBreach("mean defect routes disagree: " + std::to_string(via_defect) + " vs " +
                            std::to_string(via_nu));
  return via_defect;
}

CollapseReport check_collapsibility(const CollapseQuery& q, const Table& t) {
  validate_query(q, t);
  Ctx ctx(q, t);
  CollapseReport rep;
  rep.query = q;
  rep.tolerance = q.tol.value_or(tol::collapse_tol(q.effect));
  run_single_conditions(ctx, rep);
  rep.verdict = rep.cond_delta;
  rep.collapsible_ok = rep.cond_delta;
  return rep;
}

CollapseReport check_set_collapsibility(const CollapseQuery& q, const Table& t) {
  if (!q.common) fail(errc::spec_invalid, "family query needs a common-effect core");
  validate_query(q, t);
  Ctx ctx(q, t);
  CollapseReport rep;
  rep.query = q;
  rep.tolerance = q.tol.value_or(tol::collapse_tol(q.effect));
  run_single_conditions(ctx, rep);
  run_family(ctx, rep);
  rep.verdict = rep.family_direct_ok;
  rep.collapsible_ok = rep.family_direct_ok;
  return rep;
}

CollapseReport check_strict_collapsibility(const CollapseQuery& q, const Table& t) {
  CollapseQuery qq = q;
  qq.strict = true;
  validate_query(qq, t);
  Ctx ctx(qq, t);
  CollapseReport rep;
  rep.query = qq;
  rep.tolerance = qq.tol.value_or(tol::collapse_tol(qq.effect));
  run_single_conditions(ctx, rep);
  rep.collapsible_ok = rep.cond_delta;
  run_vanish(ctx, rep, qq.effect, /*assert_contrast=*/rep.collapsible_ok);
  rep.verdict = rep.collapsible_ok && rep.vanish_ok;
  return rep;
}

CollapseReport check_strict_set(const CollapseQuery& q, const Table& t) {
  if (!q.common) fail(errc::spec_invalid, "family query needs a common-effect core");
  CollapseQuery qq = q;
  qq.strict = true;
  validate_query(qq, t);
  Ctx ctx(qq, t);
  CollapseReport rep;
  rep.query = qq;
  rep.tolerance = qq.tol.value_or(tol::collapse_tol(qq.effect));
  run_single_conditions(ctx, rep);
  run_family(ctx, rep);
  rep.collapsible_ok = rep.family_direct_ok;
  // Every interaction above the common core that leaves the condensed margin
  // must vanish; the base of the scan is the core, not the full effect.
  run_vanish(ctx, rep, *qq.common, /*assert_contrast=*/true);
  rep.verdict = rep.family_direct_ok && rep.vanish_ok;
  return rep;
}

CollapseReport check_collapse_query(const CollapseQuery& q, const Table& t) {
  if (q.strict && q.common) return check_strict_set(q, t);
  if (q.strict) return check_strict_collapsibility(q, t);
  if (q.common) return check_set_collapsibility(q, t);
  return check_collapsibility(q, t);
}

}  // namespace mll

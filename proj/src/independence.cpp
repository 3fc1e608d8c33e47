#include "mll/independence.hpp"

#include <cmath>

#include "mll/errors.hpp"
#include "mll/tolerances.hpp"

namespace mll {

const char* indep_mode_name(IndepMode m) {
  switch (m) {
    case IndepMode::conditional: return "conditional";
    case IndepMode::joint: return "joint";
    case IndepMode::mutual: return "mutual";
  }
  return "?";
}

namespace {

void validate_partition(const Table& t, const Partition& p, IndepMode mode) {
  if (p.a.intersects(p.b) || p.a.intersects(p.c) || p.b.intersects(p.c))
    fail(errc::bad_partition, "groups overlap");
  if (p.a.empty() || p.b.empty())
    fail(errc::bad_partition, "the first two groups must be nonempty");
  if (mode == IndepMode::mutual && p.c.empty())
    fail(errc::bad_partition, "mutual independence needs three nonempty groups");
  if (!p.all().subset_of(t.vars())) fail(errc::bad_partition, "groups not within the table");
}

bool in_vanishing_family(VarSet E, const Partition& p, IndepMode mode) {
  switch (mode) {
    case IndepMode::conditional:
      return E.intersects(p.a) && E.intersects(p.b);
    case IndepMode::joint:
      return E.intersects(p.a) && E.intersects(p.b | p.c);
    case IndepMode::mutual: {
      const int touched = (E.intersects(p.a) ? 1 : 0) + (E.intersects(p.b) ? 1 : 0) +
                          (E.intersects(p.c) ? 1 : 0);
      return touched >= 2;
    }
  }
  return false;
}

/// Cellwise log of the factorized form for the mode.
double factorized_log(const Partition& p, IndepMode mode, const Table& m_ac, const Table& m_bc,
                      const Table* m_c, const Table& m_a, const Table* m_b, VarSet M,
                      const Cell& x_M) {
  switch (mode) {
    case IndepMode::conditional: {
      if (!m_c)  // empty c: plain product of the two groups
        return std::log(m_a.p(project_cell(x_M, M, p.a))) +
               std::log(m_bc.p(project_cell(x_M, M, p.b)));
      return std::log(m_ac.p(project_cell(x_M, M, p.a | p.c))) +
             std::log(m_bc.p(project_cell(x_M, M, p.b | p.c))) -
             std::log(m_c->p(project_cell(x_M, M, p.c)));
    }
    case IndepMode::joint:
      return std::log(m_a.p(project_cell(x_M, M, p.a))) +
             std::log(m_bc.p(project_cell(x_M, M, p.b | p.c)));
    case IndepMode::mutual:
      return std::log(m_a.p(project_cell(x_M, M, p.a))) +
             std::log(m_b->p(project_cell(x_M, M, p.b))) +
             std::log(m_c->p(project_cell(x_M, M, p.c)));
  }
  return 0.0;
}

}  // namespace

IndependenceVerdict test_independence(const Table& t, const Partition& part, IndepMode mode) {
  validate_partition(t, part, mode);
  const VarSet M = part.all();
  const LatticeTransform lt = LatticeTransform::log_margin(t, M);

  IndependenceVerdict v;
  v.mode = mode;

  lt.for_each_effect([&](VarSet E, const Cell& c, double, double lam) {
    if (!in_vanishing_family(E, part, mode)) return;
    const double a = std::abs(lam);
    if (a > v.lambda_evidence || v.lambda_effect.empty()) {
      v.lambda_evidence = a;
      v.lambda_effect = E;
      v.lambda_at = c;
    }
  });

  // Factorization oracle, straight from the marginal tables.
  const Table& pm = lt.margin();
  const bool has_c = !part.c.empty();
  const Table m_a = marginalize(t, part.a);
  const Table m_bc = marginalize(t, has_c && mode != IndepMode::mutual ? part.b | part.c : part.b);
  Table m_ac = m_a;  // placeholder; only used when c is nonempty
  if (has_c && mode == IndepMode::conditional) m_ac = marginalize(t, part.a | part.c);
  std::optional<Table> m_c;
  if (has_c) m_c.emplace(marginalize(t, part.c));
  std::optional<Table> m_b;
  if (mode == IndepMode::mutual) m_b.emplace(marginalize(t, part.b));

  bool first = true;
  pm.shape().for_each_cell([&](const Cell& x, std::size_t i) {
    const double fac = factorized_log(part, mode, m_ac, m_bc, m_c ? &*m_c : nullptr, m_a,
                                      m_b ? &*m_b : nullptr, M, x);
    const double r = std::abs(std::log(pm.p(i)) - fac);
    if (first || r > v.oracle_evidence) {
      v.oracle_evidence = r;
      v.oracle_at = x;
      first = false;
    }
  });

  v.lambda_ok = v.lambda_evidence <= tol::tau_zero;
  v.oracle_ok = v.oracle_evidence <= tol::tau_zero;
  v.verdict = v.lambda_ok && v.oracle_ok;
  v.agree = v.lambda_ok == v.oracle_ok;
  return v;
}

TransferResult margin_transfer_residual(const Table& t, const Partition& part, VarSet D) {
  validate_partition(t, part, IndepMode::conditional);
  if (!D.subset_of(part.c)) fail(errc::bad_partition, "D must lie within the conditioning group");

  TransferResult out;
  out.premise = test_independence(t, part, IndepMode::conditional).verdict;
  out.effect = part.a | D;

  const LatticeTransform big = LatticeTransform::log_margin(t, part.all());
  const LatticeTransform small = LatticeTransform::log_margin(t, part.a | part.c);
  const Shape shape(t.levels_of(out.effect));
  bool first = true;
  shape.for_each_cell([&](const Cell& x, std::size_t) {
    const double r = std::abs(big.lambda(out.effect, x) - small.lambda(out.effect, x));
    if (first || r > out.residual) {
      out.residual = r;
      out.at = x;
      first = false;
    }
  });
  return out;
}

namespace {

/// Strict collapsibility of each family effect when removing `removed`.
void run_family_checks(const Table& t, VarSet removed, const std::vector<VarSet>& effects,
                       SuiteResult& suite) {
  const VarSet N = t.vars();
  const VarSet M = N - removed;
  for (VarSet L : effects) {
    CollapseQuery q{L, M, N, std::nullopt, true, std::nullopt};
    CollapseReport rep = check_strict_collapsibility(q, t);
    suite.checks.push_back({removed, L, rep.verdict, rep.delta.value, rep.vanish_worst.value});
    suite.strict_collapse = suite.strict_collapse && rep.verdict;
  }
}

std::vector<VarSet> family_effects(VarSet keep, auto&& pred) {
  std::vector<VarSet> out;
  for (VarSet E : subsets_sorted(keep))
    if (!E.empty() && pred(E)) out.push_back(E);
  return out;
}

}  // namespace

SuiteResult independence_collapse_suite(const Table& t, const Partition& part, IndepMode mode) {
  validate_partition(t, part, mode);
  if (part.all() != t.vars())
    fail(errc::bad_partition, "the groups must partition the whole table");

  SuiteResult suite;
  suite.independence = test_independence(t, part, mode);
  suite.strict_collapse = true;

  switch (mode) {
    case IndepMode::conditional: {
      // Remove a, keep every effect touching b; then the mirror image.
      run_family_checks(t, part.a,
                        family_effects(part.b | part.c,
                                       [&](VarSet E) { return E.intersects(part.b); }),
                        suite);
      run_family_checks(t, part.b,
                        family_effects(part.a | part.c,
                                       [&](VarSet E) { return E.intersects(part.a); }),
                        suite);
      break;
    }
    case IndepMode::joint: {
      run_family_checks(t, part.a, family_effects(part.b | part.c, [](VarSet) { return true; }),
                        suite);
      break;
    }
    case IndepMode::mutual: {
      // Three one-group removals; the verdict needs any two of them.
      bool part_ok[3];
      const Partition& p = part;
      struct Item {
        VarSet removed, keep1, keep2;
      } items[3] = {{p.a, p.b, p.c}, {p.b, p.a, p.c}, {p.c, p.a, p.b}};
      for (int i = 0; i < 3; ++i) {
        SuiteResult sub;
        sub.strict_collapse = true;
        run_family_checks(t, items[i].removed,
                          family_effects(items[i].keep1 | items[i].keep2,
                                         [&](VarSet E) {
                                           return E.subset_of(items[i].keep1) ||
                                                  E.subset_of(items[i].keep2);
                                         }),
                          sub);
        part_ok[i] = sub.strict_collapse;
        for (auto& c : sub.checks) suite.checks.push_back(c);
      }
      const int ok = (part_ok[0] ? 1 : 0) + (part_ok[1] ? 1 : 0) + (part_ok[2] ? 1 : 0);
      suite.strict_collapse = ok >= 2;
      break;
    }
  }

  suite.equivalence_ok = suite.independence.verdict == suite.strict_collapse;
  return suite;
}

Decomposition decompose_interaction(const Table& t, VarSet L, VarSet A, VarSet B) {
  if (A.intersects(B)) fail(errc::overlapping_sets, "the two groups overlap");
  if (A.empty() || B.empty()) fail(errc::bad_partition, "both groups must be nonempty");
  if (!(A | B).subset_of(t.vars())) fail(errc::bad_partition, "groups not within the table");
  if (!L.subset_of(A | B))
    fail(errc::not_covered, "effect " + L.to_string() + " not covered by the two groups");

  const VarSet AB = A | B;
  const LatticeTransform full = LatticeTransform::log_margin(t, AB);
  const LatticeTransform margin_b = LatticeTransform::log_margin(t, B);

  // Conditional tensor: log p_{A|B} over the AB margin, built from the
  // conditional distribution itself so the additivity below is a real check.
  const ConditionalSlice slice = condition(t, A, B);
  const Table& pm = full.margin();
  std::vector<double> cond(pm.cell_count());
  pm.shape().for_each_cell([&](const Cell& x, std::size_t i) {
    const Cell x_A = project_cell(x, AB, A);
    const Cell x_B = project_cell(x, AB, B);
    cond[i] = slice.log_p(x_A, x_B);
  });
  const LatticeTransform cond_lt = LatticeTransform::of_values(AB.ids(), pm.levels(), cond);

  Decomposition out;
  out.effect = L;
  out.levels = L.empty() ? std::vector<int>{} : t.levels_of(L);
  const Shape shape(out.levels);

  shape.for_each_cell([&](const Cell& x_L, std::size_t) {
    // First piece: alternating sum of B-margin fiber means; only the B-part
    // of each subset constrains the fiber. Equals lambda_L^B when L lies in B.
    double mterm = 0.0;
    for (VarSet sub : subsets_sorted(L)) {
      const VarSet sub_b = sub & B;
      const double sign = ((L.size() - sub.size()) % 2 == 0) ? 1.0 : -1.0;
      mterm += sign * margin_b.nu(sub_b, project_cell(x_L, L, sub_b));
    }
    const double cterm = cond_lt.lambda(L, x_L);
    const double tot = full.lambda(L, x_L);
    out.margin_term.push_back(mterm);
    out.conditional_term.push_back(cterm);
    out.total.push_back(tot);
    out.additivity_residual = std::max(out.additivity_residual, std::abs(mterm + cterm - tot));
  });
  return out;
}

ConditionalCollapseReport conditional_collapse_check(const Table& t, VarSet R, int pivot) {
  const VarSet M = t.vars();
  if (R.empty() || !R.strict_subset_of(M))
    fail(errc::bad_partition, "the removed group must be a nonempty strict subset");
  const VarSet B = M - R;
  if (!B.contains(pivot)) fail(errc::bad_partition, "the pivot must lie outside the removed group");

  ConditionalCollapseReport rep;
  rep.pivot = pivot;
  rep.removed = R;
  rep.premise_detail =
      test_independence(t, {R, VarSet::single(pivot), B - VarSet::single(pivot)},
                        IndepMode::conditional);
  rep.premise = rep.premise_detail.verdict;

  const LatticeTransform full = LatticeTransform::log_margin(t, M);
  const LatticeTransform kept = LatticeTransform::log_margin(t, B);
  rep.verdict = rep.premise;
  for (VarSet L : subsets_sorted(B)) {
    if (L.empty()) continue;
    const Shape shape(t.levels_of(L));
    EffectResidual er;
    er.effect = L;
    bool first = true;
    shape.for_each_cell([&](const Cell& x, std::size_t) {
      const double r = std::abs(full.lambda(L, x) - kept.lambda(L, x));
      if (first || r > er.residual) {
        er.residual = r;
        er.at = x;
        first = false;
      }
    });
    er.ok = er.residual <= tol::collapse_tol(L);
    if (L.contains(pivot)) {
      rep.asserted.push_back(er);
      if (rep.premise && !er.ok) rep.verdict = false;
    } else {
      rep.reported.push_back(er);
    }
  }
  return rep;
}

}  // namespace mll

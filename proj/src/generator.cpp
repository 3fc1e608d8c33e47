#include "mll/generator.hpp"

#include <cmath>
#include <random>

#include "mll/engine.hpp"
#include "mll/errors.hpp"
#include "mll/tolerances.hpp"

namespace mll {

const char* gen_mode_name(GenMode m) {
  switch (m) {
    case GenMode::random: return "random";
    case GenMode::conditional_indep: return "conditional_indep";
    case GenMode::joint_indep: return "joint_indep";
    case GenMode::mutual_indep: return "mutual_indep";
    case GenMode::from_loglinear: return "from_loglinear";
  }
  return "?";
}

std::optional<GenMode> gen_mode_from_name(const std::string& s) {
  for (GenMode m : {GenMode::random, GenMode::conditional_indep, GenMode::joint_indep,
                    GenMode::mutual_indep, GenMode::from_loglinear})
    if (s == gen_mode_name(m)) return m;
  return std::nullopt;
}

namespace {

/// mt19937_64 with a fixed mapping to doubles, so tables are bit-identical
/// across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double unit() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double symmetric() { return 2.0 * unit() - 1.0; }  // [-1, 1)

 private:
  std::mt19937_64 eng_;
};

std::vector<double> random_weights(Rng& rng, std::size_t n, double concentration) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(concentration * rng.symmetric());
  return w;
}

std::vector<double> normalized(std::vector<double> w) {
  double s = 0.0;
  for (double x : w) s += x;
  for (double& x : w) x /= s;
  return w;
}

void validate(const GenSpec& spec) {
  if (spec.levels.empty()) fail(errc::spec_invalid, "no variables");
  for (int l : spec.levels)
    if (l < 2) fail(errc::spec_invalid, "every variable needs at least 2 levels");
  if (!(spec.concentration > 0.0)) fail(errc::spec_invalid, "concentration must be positive");
  const VarSet V = VarSet::range(static_cast<int>(spec.levels.size()));
  const bool indep = spec.mode == GenMode::conditional_indep ||
                     spec.mode == GenMode::joint_indep || spec.mode == GenMode::mutual_indep;
  if (indep) {
    const Partition& p = spec.part;
    if (p.a.empty() || p.b.empty()) fail(errc::spec_invalid, "first two groups must be nonempty");
    if (spec.mode == GenMode::mutual_indep && p.c.empty())
      fail(errc::spec_invalid, "mutual independence needs three nonempty groups");
    if (p.a.intersects(p.b) || p.a.intersects(p.c) || p.b.intersects(p.c))
      fail(errc::spec_invalid, "groups overlap");
    if (p.all() != V) fail(errc::spec_invalid, "groups must cover every variable");
  }
  if (spec.mode == GenMode::from_loglinear) {
    for (const auto& [effect, values] : spec.assign) {
      if (!effect.subset_of(V) || effect.empty())
        fail(errc::spec_invalid, "prescribed effect " + effect.to_string() + " invalid");
      std::size_t expect = 1;
      effect.for_each([&](int v) { expect *= static_cast<std::size_t>(spec.levels[v]); });
      if (values.size() != expect)
        fail(errc::spec_invalid, "prescribed values for " + effect.to_string() +
                                     " have the wrong cell count");
    }
  }
}

std::vector<int> levels_of(const GenSpec& spec, VarSet s) {
  std::vector<int> out;
  s.for_each([&](int v) { out.push_back(spec.levels[v]); });
  return out;
}

/// Per-group factor tables drawn in a fixed order, then multiplied cellwise.
std::vector<double> independence_weights(const GenSpec& spec, Rng& rng) {
  const Partition& p = spec.part;
  const Shape full(spec.levels);
  const VarSet V = VarSet::range(static_cast<int>(spec.levels.size()));
  std::vector<double> w(full.total(), 1.0);

  auto apply_factor = [&](VarSet over, const std::vector<double>& probs) {
    const Shape s(levels_of(spec, over));
    full.for_each_cell([&](const Cell& c, std::size_t i) {
      w[i] *= probs[s.flat(project_cell(c, V, over))];
    });
  };

  switch (spec.mode) {
    case GenMode::conditional_indep: {
      if (p.c.empty()) {
        apply_factor(p.a, normalized(random_weights(rng, Shape(levels_of(spec, p.a)).total(),
                                                    spec.concentration)));
        apply_factor(p.b, normalized(random_weights(rng, Shape(levels_of(spec, p.b)).total(),
                                                    spec.concentration)));
        break;
      }
      // Draw order: p_C, then each conditional block of A given C, then of B.
      const Shape cs(levels_of(spec, p.c));
      const Shape as(levels_of(spec, p.a));
      const Shape bs(levels_of(spec, p.b));
      const auto pc = normalized(random_weights(rng, cs.total(), spec.concentration));
      std::vector<std::vector<double>> pa(cs.total()), pb(cs.total());
      for (std::size_t i = 0; i < cs.total(); ++i)
        pa[i] = normalized(random_weights(rng, as.total(), spec.concentration));
      for (std::size_t i = 0; i < cs.total(); ++i)
        pb[i] = normalized(random_weights(rng, bs.total(), spec.concentration));
      full.for_each_cell([&](const Cell& c, std::size_t i) {
        const std::size_t ci = cs.flat(project_cell(c, V, p.c));
        w[i] = pc[ci] * pa[ci][as.flat(project_cell(c, V, p.a))] *
               pb[ci][bs.flat(project_cell(c, V, p.b))];
      });
      break;
    }
    case GenMode::joint_indep: {
      apply_factor(p.a, normalized(random_weights(rng, Shape(levels_of(spec, p.a)).total(),
                                                  spec.concentration)));
      const VarSet bc = p.b | p.c;
      apply_factor(bc, normalized(random_weights(rng, Shape(levels_of(spec, bc)).total(),
                                                 spec.concentration)));
      break;
    }
    case GenMode::mutual_indep: {
      for (VarSet g : {p.a, p.b, p.c})
        apply_factor(g, normalized(random_weights(rng, Shape(levels_of(spec, g)).total(),
                                                  spec.concentration)));
      break;
    }
    default: fail(errc::spec_invalid, "not an independence mode");
  }
  return w;
}

std::vector<double> loglinear_weights(const GenSpec& spec) {
  const Shape full(spec.levels);
  const VarSet V = VarSet::range(static_cast<int>(spec.levels.size()));
  std::vector<double> logw(full.total(), 0.0);
  for (const auto& [effect, values] : spec.assign) {
    const std::vector<int> elv = levels_of(spec, effect);
    const std::vector<double> centered = center_zero_sum(values, elv);
    const Shape es(elv);
    full.for_each_cell([&](const Cell& c, std::size_t i) {
      logw[i] += centered[es.flat(project_cell(c, V, effect))];
    });
  }
  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(logw[i]);
  return w;
}

}  // namespace

std::vector<double> center_zero_sum(std::vector<double> values, const std::vector<int>& levels) {
  const Shape shape(levels);
  if (values.size() != shape.total()) fail(errc::shape_mismatch, "value count mismatch");
  const int rank = static_cast<int>(levels.size());

  auto worst_margin = [&]() {
    double worst = 0.0;
    for (int d = 0; d < rank; ++d) {
      shape.for_each_cell([&](const Cell& c, std::size_t) {
        if (c[d] != 0) return;
        Cell probe = c;
        double sum = 0.0;
        for (int l = 0; l < levels[d]; ++l) {
          probe[d] = l;
          sum += values[shape.flat(probe)];
        }
        worst = std::max(worst, std::abs(sum));
      });
    }
    return worst;
  };

  // The per-coordinate centering operators commute, so one pass suffices in
  // exact arithmetic; iterate to clear roundoff.
  for (int iter = 0; iter < 4 && worst_margin() > 1e-12; ++iter) {
    for (int d = 0; d < rank; ++d) {
      shape.for_each_cell([&](const Cell& c, std::size_t) {
        if (c[d] != 0) return;
        Cell probe = c;
        double mean = 0.0;
        for (int l = 0; l < levels[d]; ++l) {
          probe[d] = l;
          mean += values[shape.flat(probe)];
        }
        mean /= static_cast<double>(levels[d]);
        for (int l = 0; l < levels[d]; ++l) {
          probe[d] = l;
          values[shape.flat(probe)] -= mean;
        }
      });
    }
  }
  if (worst_margin() > 1e-12) fail(errc::spec_invalid, "interaction values cannot be centered");
  return values;
}

Table generate(const GenSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  std::vector<double> w;
  switch (spec.mode) {
    case GenMode::random:
      w = random_weights(rng, Shape(spec.levels).total(), spec.concentration);
      break;
    case GenMode::conditional_indep:
    case GenMode::joint_indep:
    case GenMode::mutual_indep:
      w = independence_weights(spec, rng);
      break;
    case GenMode::from_loglinear:
      w = loglinear_weights(spec);
      break;
  }
  return build_table(spec.levels, w);
}

std::optional<Table> find_witness(const std::function<bool(const Table&)>& predicate,
                                  const GenSpec& base, int budget) {
  if (budget < 1) fail(errc::spec_invalid, "budget must be at least 1");
  for (int i = 0; i < budget; ++i) {
    GenSpec s = base;
    s.seed = base.seed + static_cast<std::uint64_t>(i);
    Table t = generate(s);
    if (predicate(t)) return t;
  }
  return std::nullopt;
}

std::optional<Table> find_collapsible_dependent_table(std::uint64_t seed, int budget) {
  // Family: 2x2x2 tables with fixed nonzero 1-2 and 2-3 interactions, no
  // three-way term, and a free 1-3 value t. g(t) is the 1-3 interaction of
  // the 1,3 margin; a fixed point g(t) = t with t away from zero gives a
  // table collapsible over variable 2 although variables 1 and 3 stay
  // conditionally dependent. The fixed point is found by bracketing the sign
  // change of g(t) - t and bisecting.
  Rng rng(seed);
  const double a = 0.2 + 0.2 * rng.unit();  // 1-2 interaction strength
  const double b = 0.2 + 0.2 * rng.unit();  // 2-3 interaction strength

  const VarSet v1 = VarSet::single(0), v2 = VarSet::single(1), v3 = VarSet::single(2);
  const VarSet e12 = v1 | v2, e23 = v2 | v3, e13 = v1 | v3;

  auto make = [&](double tval) {
    GenSpec s;
    s.levels = {2, 2, 2};
    s.mode = GenMode::from_loglinear;
    s.assign = {{e12, {a, -a, -a, a}}, {e23, {b, -b, -b, b}}, {e13, {tval, -tval, -tval, tval}}};
    return generate(s);
  };
  auto h = [&](double tval) {
    Table t = make(tval);
    const Cell zz{0, 0};
    return lambda(t, e13, e13, zz) - tval;
  };

  double lo = 0.0, hi = 0.0;
  double hlo = h(lo);
  bool bracketed = false;
  int spent = 1;
  for (double step = 0.05; spent < budget && step < 3.0; step *= 1.5, ++spent) {
    hi = (hlo > 0.0) ? step : -step;
    if (h(hi) * hlo <= 0.0) {
      bracketed = true;
      break;
    }
  }
  if (!bracketed) return std::nullopt;

  for (int i = 0; i < 90 && spent < budget; ++i, ++spent) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) * hlo <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  const double t_star = 0.5 * (lo + hi);
  if (std::abs(t_star) < 1e-2) return std::nullopt;  // needs a clearly nonzero interaction

  Table witness = make(t_star);
  const Cell zz{0, 0};
  if (std::abs(lambda(witness, e13, e13, zz) - lambda(witness, e13, VarSet::range(3), zz)) >
      tol::tau_zero)
    return std::nullopt;
  return witness;
}

}  // namespace mll

#include "mll/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mll/errors.hpp"
#include "mll/tolerances.hpp"

namespace mll::io {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::parse_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<int> one_based(VarSet s) {
  std::vector<int> out;
  s.for_each([&](int v) { out.push_back(v + 1); });
  return out;
}

Table finish_table(const std::vector<int>& levels, const std::vector<double>& weights,
                   std::vector<std::string> names) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > tol::eps_pos)) fail(errc::positivity_violation, "weights must be strictly positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) <= tol::tau_norm) {
    // Already a distribution; keep the stored values bit for bit.
    std::vector<int> ids(levels.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return Table(ids, levels, weights, sum, std::move(names));
  }
  return build_table(levels, weights, std::move(names));
}

}  // namespace

Table table_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("variables"))
    fail(errc::parse_error, "table JSON needs a variables list");
  std::vector<int> levels;
  std::vector<std::string> names;
  for (const auto& v : j.at("variables")) {
    if (!v.contains("levels")) fail(errc::parse_error, "variable entry without levels");
    levels.push_back(v.at("levels").get<int>());
    names.push_back(v.contains("name") ? v.at("name").get<std::string>()
                                       : std::to_string(names.size() + 1));
  }
  Shape shape(levels);

  std::vector<double> weights;
  if (j.contains("weights")) {
    for (const auto& w : j.at("weights")) weights.push_back(w.get<double>());
    if (weights.size() != shape.total())
      fail(errc::shape_mismatch, "dense weights length " + std::to_string(weights.size()) +
                                     " does not match cell count " + std::to_string(shape.total()));
  } else if (j.contains("cells")) {
    weights.assign(shape.total(), -1.0);
    for (const auto& c : j.at("cells")) {
      if (!c.contains("index") || !c.contains("weight"))
        fail(errc::parse_error, "sparse cell entry needs index and weight");
      Cell idx;
      for (const auto& x : c.at("index")) idx.push_back(x.get<int>());
      if (idx.size() != levels.size()) fail(errc::parse_error, "sparse cell index has wrong arity");
      for (std::size_t d = 0; d < idx.size(); ++d)
        if (idx[d] < 0 || idx[d] >= levels[d])
          fail(errc::parse_error, "sparse cell index out of range");
      const std::size_t flat = shape.flat(idx);
      if (weights[flat] >= 0.0) {
        std::string s;
        for (int x : idx) s += (s.empty() ? "" : ",") + std::to_string(x);
        fail(errc::parse_error, "duplicate cell index [" + s + "]");
      }
      weights[flat] = c.at("weight").get<double>();
    }
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (weights[i] < 0.0) {
        Cell c = shape.unflat(i);
        std::string s;
        for (int x : c) s += (s.empty() ? "" : ",") + std::to_string(x);
        fail(errc::parse_error, "missing cell [" + s + "]");
      }
  } else {
    fail(errc::parse_error, "table JSON needs weights or cells");
  }
  return finish_table(levels, weights, std::move(names));
}

Table table_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(errc::parse_error, "empty CSV");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) header.push_back(tok);
  }
  if (header.size() < 2 || header.back() != "count")
    fail(errc::parse_error, "CSV header must list variable names and end with count");
  const std::size_t nvars = header.size() - 1;
  std::vector<std::string> names(header.begin(), header.end() - 1);

  struct Row {
    Cell idx;
    double count;
  };
  std::vector<Row> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    Row r;
    int cols = 0;
    try {
      while (std::getline(ls, tok, ',')) {
        if (r.idx.size() < nvars)
          r.idx.push_back(std::stoi(tok));
        else
          r.count = std::stod(tok);
        ++cols;
      }
    } catch (const std::exception&) {
      fail(errc::parse_error, "line " + std::to_string(lineno) + ": bad number '" + tok + "'");
    }
    if (r.idx.size() != nvars || cols != static_cast<int>(nvars) + 1)
      fail(errc::parse_error, "line " + std::to_string(lineno) + ": wrong column count");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) fail(errc::parse_error, "CSV has no data rows");

  std::vector<int> levels(nvars, 0);
  for (const Row& r : rows)
    for (std::size_t d = 0; d < nvars; ++d) levels[d] = std::max(levels[d], r.idx[d] + 1);
  Shape shape(levels);
  std::vector<double> weights(shape.total(), -1.0);
  for (const Row& r : rows) {
    const std::size_t flat = shape.flat(r.idx);
    if (weights[flat] >= 0.0) fail(errc::parse_error, "duplicate CSV cell");
    weights[flat] = r.count;
  }
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] < 0.0) {
      Cell c = shape.unflat(i);
      std::string s;
      for (int x : c) s += (s.empty() ? "" : ",") + std::to_string(x);
      fail(errc::parse_error, "missing cell [" + s + "]");
    }
  return finish_table(levels, weights, std::move(names));
}

Table parse_table(const std::filesystem::path& path, std::optional<Format> hint) {
  Format fmt = hint.value_or(path.extension() == ".csv" ? Format::csv : Format::json);
  const std::string text = read_file(path);
  if (fmt == Format::csv) return table_from_csv(text);
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(errc::parse_error, "invalid JSON in " + path.string());
  return table_from_json(j);
}

ordered_json table_to_json(const Table& t) {
  ordered_json j;
  j["schema"] = "mll.table/1";
  ordered_json vars = ordered_json::array();
  for (std::size_t i = 0; i < t.var_ids().size(); ++i)
    vars.push_back({{"name", t.names()[i]}, {"levels", t.levels()[i]}});
  j["variables"] = std::move(vars);
  j["weights"] = std::vector<double>(t.probs().begin(), t.probs().end());
  j["total"] = t.original_total();
  return j;
}

void write_table(const Table& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::parse_error, "cannot write " + path.string());
  out << table_to_json(t).dump(2) << '\n';
}

MarginalSpec spec_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("margins"))
    fail(errc::parse_error, "spec JSON needs a margins list");
  MarginalSpec spec;
  for (const auto& mb : j.at("margins")) {
    MarginalSpec::MarginBlock blk;
    std::vector<int> ids;
    for (const auto& v : mb.at("margin")) ids.push_back(v.get<int>() - 1);
    blk.margin = VarSet::of(ids);
    for (const auto& e : mb.at("effects")) {
      std::vector<int> eids;
      for (const auto& v : e) eids.push_back(v.get<int>() - 1);
      blk.effects.push_back(VarSet::of(eids));
    }
    spec.margins.push_back(std::move(blk));
  }
  return spec;
}

std::vector<std::pair<VarSet, std::vector<double>>> assignment_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("effects"))
    fail(errc::parse_error, "assignment JSON needs an effects list");
  std::vector<std::pair<VarSet, std::vector<double>>> out;
  for (const auto& e : j.at("effects")) {
    std::vector<int> ids;
    for (const auto& v : e.at("vars")) ids.push_back(v.get<int>() - 1);
    std::vector<double> vals;
    for (const auto& v : e.at("values")) vals.push_back(v.get<double>());
    out.emplace_back(VarSet::of(ids), std::move(vals));
  }
  return out;
}

std::string digest_bytes(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

std::string digest_file(const std::filesystem::path& path) { return digest_bytes(read_file(path)); }

ordered_json varset_json(VarSet s) { return one_based(s); }

ordered_json cell_json(const Cell& c) { return c; }

ordered_json residual_json(const ResidualAt& r) {
  ordered_json j;
  j["value"] = r.value;
  j["at"] = r.at;
  j["over"] = one_based(r.over);
  return j;
}

namespace {
ordered_json effect_residuals_json(const std::vector<EffectResidual>& v) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : v) {
    ordered_json j;
    j["effect"] = one_based(e.effect);
    j["residual"] = e.residual;
    j["at"] = e.at;
    j["ok"] = e.ok;
    arr.push_back(std::move(j));
  }
  return arr;
}
}  // namespace

ordered_json collapse_report_json(const CollapseReport& rep) {
  ordered_json j;
  j["query"] = {{"effect", one_based(rep.query.effect)},
                {"margin", one_based(rep.query.margin)},
                {"super", one_based(rep.query.super)},
                {"strict", rep.query.strict}};
  if (rep.query.common) j["query"]["common"] = one_based(*rep.query.common);
  j["tolerance"] = rep.tolerance;
  j["verdict"] = rep.verdict;
  j["conditions"] = {{"delta", residual_json(rep.delta)},
                     {"defect_gap", residual_json(rep.defect_gap)},
                     {"alternating", residual_json(rep.alternating)},
                     {"delta_ok", rep.cond_delta},
                     {"defect_gap_ok", rep.cond_gap},
                     {"alternating_ok", rep.cond_alternating}};
  if (rep.query.common) {
    j["family"] = effect_residuals_json(rep.family);
    j["family_identity"] = residual_json(rep.family_identity);
    j["family_direct_ok"] = rep.family_direct_ok;
    j["family_identity_ok"] = rep.family_identity_ok;
  }
  if (rep.query.strict) {
    j["vanish"] = effect_residuals_json(rep.vanish);
    j["vanish_worst"] = residual_json(rep.vanish_worst);
    j["nu_contrast"] = residual_json(rep.nu_contrast);
    j["vanish_aggregate"] = residual_json(rep.vanish_aggregate);
    j["collapsible_ok"] = rep.collapsible_ok;
    j["vanish_ok"] = rep.vanish_ok;
  }
  return j;
}

ordered_json independence_json(const IndependenceVerdict& v) {
  ordered_json j;
  j["mode"] = indep_mode_name(v.mode);
  j["verdict"] = v.verdict;
  j["lambda_evidence"] = v.lambda_evidence;
  j["lambda_effect"] = one_based(v.lambda_effect);
  j["lambda_at"] = v.lambda_at;
  j["oracle_evidence"] = v.oracle_evidence;
  j["oracle_at"] = v.oracle_at;
  j["lambda_ok"] = v.lambda_ok;
  j["oracle_ok"] = v.oracle_ok;
  j["evidence_agrees"] = v.agree;
  return j;
}

ordered_json suite_json(const SuiteResult& s) {
  ordered_json j;
  j["independence"] = independence_json(s.independence);
  ordered_json checks = ordered_json::array();
  for (const auto& c : s.checks) {
    checks.push_back({{"removed", one_based(c.removed)},
                      {"effect", one_based(c.effect)},
                      {"verdict", c.verdict},
                      {"delta_residual", c.delta_residual},
                      {"vanish_residual", c.vanish_residual}});
  }
  j["collapse_checks"] = std::move(checks);
  j["strict_collapse"] = s.strict_collapse;
  j["equivalence_ok"] = s.equivalence_ok;
  return j;
}

ordered_json decomposition_json(const Decomposition& d) {
  ordered_json j;
  j["effect"] = one_based(d.effect);
  j["levels"] = d.levels;
  j["margin_term"] = d.margin_term;
  j["conditional_term"] = d.conditional_term;
  j["total"] = d.total;
  j["additivity_residual"] = d.additivity_residual;
  return j;
}

ordered_json classify_json(const ClassifyResult& c) {
  ordered_json j;
  j["hierarchical"] = c.hierarchical;
  j["complete"] = c.complete;
  j["violations"] = c.violations;
  return j;
}

ordered_json mll_set_json(const MllSet& set) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : set.entries()) {
    ordered_json j;
    j["margin"] = one_based(e.margin);
    j["effect"] = one_based(e.effect);
    j["levels"] = e.levels;
    j["values"] = e.values;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace mll::io

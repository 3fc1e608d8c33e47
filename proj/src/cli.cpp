#include "mll/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mll/errors.hpp"
#include "mll/io.hpp"
#include "mll/tolerances.hpp"
#include "mll/version.hpp"

namespace mll {

namespace {

using io::ordered_json;

VarSet parse_set(const std::string& s) {
  if (s.empty()) return {};
  std::vector<int> ids;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      const int v = std::stoi(tok);
      if (v < 1 || v > 32) fail(errc::usage, "variable index out of range: " + tok);
      ids.push_back(v - 1);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(errc::usage, "bad variable index '" + tok + "'");
    }
  }
  return VarSet::of(ids);
}

Cell parse_cell(const std::string& s) {
  Cell out;
  if (s.empty()) return out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      fail(errc::usage, "bad cell coordinate '" + tok + "'");
    }
  }
  return out;
}

std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      fail(errc::usage, "bad level count '" + tok + "'");
    }
  }
  return out;
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<double> resolve_tol(const std::optional<double>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("MLL_TOL")) {
    try {
      return std::stod(env);
    } catch (const std::exception&) {
      fail(errc::usage, "MLL_TOL is not a number");
    }
  }
  return std::nullopt;
}

ordered_json envelope(const std::string& command, const std::optional<std::string>& input_path) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["tool"] = {{"name", "mll"}, {"version", kVersion}};
  j["command"] = command;
  if (input_path) j["input"] = {{"path", *input_path}, {"digest", io::digest_file(*input_path)}};
  j["tolerances"] = {{"eps_pos", tol::eps_pos},
                     {"tau_norm", tol::tau_norm},
                     {"tau_eq_rel", tol::tau_eq_rel},
                     {"tau_eq_abs", tol::tau_eq_abs},
                     {"tau_zero", tol::tau_zero}};
  return j;
}

void render_text(const ordered_json& j, std::ostream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_object() || (v.is_array() && !v.empty() && (v.front().is_object() || v.front().is_array()))) {
        out << pad << k << ":\n";
        render_text(v, out, indent + 1);
      } else {
        out << pad << k << ": " << v.dump() << '\n';
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      out << pad << "-\n";
      render_text(v, out, indent + 1);
    }
  } else {
    out << pad << j.dump() << '\n';
  }
}

void emit(ordered_json j, const std::string& format, std::ostream& out) {
  j["generated_at"] = timestamp_utc();
  if (format == "text")
    render_text(j, out, 0);
  else
    out << j.dump(2) << '\n';
}

struct Common {
  std::string table_path;
  std::string format = "json";
  std::optional<double> tol;
};

void add_common(CLI::App* cmd, Common& c, bool needs_table = true) {
  if (needs_table)
    cmd->add_option("--table", c.table_path, "table file (JSON or CSV)")->required();
  cmd->add_option("--format", c.format, "output format: json or text")
      ->check(CLI::IsMember({"json", "text"}));
  cmd->add_option("--tol", c.tol, "verdict tolerance override");
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* me = dynamic_cast<const Error*>(&e)) {
    if (me->code() == errc::equivalence_breach) return 3;
    if (me->code() == errc::usage) return 1;
    return 2;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"marginal log-linear parameters, collapsibility and independence checks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // --- params ---
  auto* params = app.add_subcommand("params", "evaluate marginal log-linear parameters");
  Common params_c;
  std::string params_margin, params_effect = "\x01", params_at = "\x01";
  bool params_all = false;
  add_common(params, params_c);
  params->add_option("--margin", params_margin, "margin, e.g. 1,2 (default: all variables)");
  params->add_option("--effect", params_effect, "effect within the margin (empty for the constant)");
  params->add_option("--at", params_at, "cell of the effect, e.g. 0,1");
  params->add_flag("--all-margins", params_all, "list every margin's parameters");

  // --- collapse ---
  auto* collapse = app.add_subcommand("collapse", "collapsibility of an effect across margins");
  Common collapse_c;
  std::string collapse_effect, collapse_margin, collapse_super, collapse_common;
  bool collapse_strict = false;
  add_common(collapse, collapse_c);
  collapse->add_option("--effect", collapse_effect, "effect L")->required();
  collapse->add_option("--margin", collapse_margin, "condensed margin M")->required();
  collapse->add_option("--super", collapse_super, "outer margin N")->required();
  collapse->add_option("--common", collapse_common, "common core S for a family check");
  collapse->add_flag("--strict", collapse_strict, "also require higher interactions to vanish");

  // --- independence ---
  auto* indep = app.add_subcommand("independence", "conditional, joint or mutual independence");
  Common indep_c;
  std::string indep_mode, indep_a, indep_b, indep_cset;
  bool indep_suite = false;
  add_common(indep, indep_c);
  indep->add_option("--mode", indep_mode, "conditional, joint or mutual")
      ->required()
      ->check(CLI::IsMember({"conditional", "joint", "mutual"}));
  indep->add_option("--A", indep_a, "first group")->required();
  indep->add_option("--B", indep_b, "second group")->required();
  indep->add_option("--C", indep_cset, "third group (may be empty)");
  indep->add_flag("--suite", indep_suite,
                  "also run the matching strict-collapsibility family checks");

  // --- decompose ---
  auto* decomp = app.add_subcommand("decompose", "split an interaction into margin and conditional parts");
  Common decomp_c;
  std::string decomp_effect, decomp_a, decomp_b;
  add_common(decomp, decomp_c);
  decomp->add_option("--effect", decomp_effect, "effect L")->required();
  decomp->add_option("--A", decomp_a, "conditioned group")->required();
  decomp->add_option("--B", decomp_b, "conditioning group")->required();

  // --- classify ---
  auto* classify_cmd = app.add_subcommand("classify", "hierarchical/complete check of a collection");
  Common classify_c;
  std::string classify_spec, classify_universe;
  int classify_nvars = 0;
  add_common(classify_cmd, classify_c, /*needs_table=*/false);
  classify_cmd->add_option("--spec", classify_spec, "collection file (JSON)")->required();
  classify_cmd->add_option("--universe", classify_universe, "universe variables, e.g. 1,2,3");
  classify_cmd->add_option("--vars", classify_nvars, "universe size (variables 1..n)");
  classify_cmd->add_option("--table", classify_c.table_path,
                           "table to evaluate the collection on");

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "generate a table");
  Common gen_c;
  std::string gen_mode = "random", gen_levels, gen_a, gen_b, gen_cset, gen_assign, gen_out;
  std::uint64_t gen_seed = 0;
  double gen_conc = 1.0;
  gen->add_option("--mode", gen_mode, "random, conditional_indep, joint_indep, mutual_indep, from_loglinear")
      ->check(CLI::IsMember({"random", "conditional_indep", "joint_indep", "mutual_indep",
                             "from_loglinear"}));
  gen->add_option("--levels", gen_levels, "level counts, e.g. 2,2,2")->required();
  gen->add_option("--A", gen_a, "first group (independence modes)");
  gen->add_option("--B", gen_b, "second group");
  gen->add_option("--C", gen_cset, "third group");
  gen->add_option("--assign", gen_assign, "interaction assignment file (from_loglinear)");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--concentration", gen_conc, "log-weight spread");
  gen->add_option("-o,--out", gen_out, "output table file")->required();
  gen->add_option("--format", gen_c.format, "output format: json or text")
      ->check(CLI::IsMember({"json", "text"}));

  std::vector<const char*> argv;
  argv.push_back("mll");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help, --version
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (params->parsed()) {
      const Table t = io::parse_table(params_c.table_path);
      ordered_json j = envelope("params", params_c.table_path);
      const VarSet margin = params_margin.empty() ? t.vars() : parse_set(params_margin);
      const bool have_effect = params_effect != "\x01";
      const bool have_at = params_at != "\x01";
      if (have_at) {
        const VarSet effect = have_effect ? parse_set(params_effect) : VarSet{};
        const Cell at = parse_cell(params_at);
        j["margin"] = io::varset_json(margin);
        j["effect"] = io::varset_json(effect);
        j["at"] = at;
        j["value"] = lambda(t, effect, margin, at);
      } else if (have_effect) {
        const VarSet effect = parse_set(params_effect);
        const MllSet set = expand_log_linear(t, margin);
        MllSet one;
        one.add(set.at(effect, margin));
        j["params"] = io::mll_set_json(one);
      } else if (params_all) {
        MllSet all;
        for (VarSet M : subsets_sorted(t.vars())) {
          if (M.empty()) continue;
          for (const auto& e : expand_log_linear(t, M).entries()) all.add(e);
        }
        j["params"] = io::mll_set_json(all);
      } else {
        j["params"] = io::mll_set_json(expand_log_linear(t, margin));
      }
      emit(std::move(j), params_c.format, out);
      return 0;
    }

    if (collapse->parsed()) {
      const Table t = io::parse_table(collapse_c.table_path);
      CollapseQuery q;
      q.effect = parse_set(collapse_effect);
      q.margin = parse_set(collapse_margin);
      q.super = parse_set(collapse_super);
      if (!collapse_common.empty()) q.common = parse_set(collapse_common);
      q.strict = collapse_strict;
      q.tol = resolve_tol(collapse_c.tol);
      const CollapseReport rep = check_collapse_query(q, t);
      ordered_json j = envelope("collapse", collapse_c.table_path);
      j["report"] = io::collapse_report_json(rep);
      emit(std::move(j), collapse_c.format, out);
      return 0;
    }

    if (indep->parsed()) {
      const Table t = io::parse_table(indep_c.table_path);
      Partition part{parse_set(indep_a), parse_set(indep_b), parse_set(indep_cset)};
      IndepMode mode = indep_mode == "conditional" ? IndepMode::conditional
                       : indep_mode == "joint"     ? IndepMode::joint
                                                   : IndepMode::mutual;
      ordered_json j = envelope("independence", indep_c.table_path);
      if (indep_suite) {
        j["suite"] = io::suite_json(independence_collapse_suite(t, part, mode));
      } else {
        j["verdict"] = io::independence_json(test_independence(t, part, mode));
      }
      emit(std::move(j), indep_c.format, out);
      return 0;
    }

    if (decomp->parsed()) {
      const Table t = io::parse_table(decomp_c.table_path);
      const Decomposition d =
          decompose_interaction(t, parse_set(decomp_effect), parse_set(decomp_a), parse_set(decomp_b));
      ordered_json j = envelope("decompose", decomp_c.table_path);
      j["decomposition"] = io::decomposition_json(d);
      emit(std::move(j), decomp_c.format, out);
      return 0;
    }

    if (classify_cmd->parsed()) {
      std::ifstream in(classify_spec);
      if (!in) fail(errc::parse_error, "cannot open " + classify_spec);
      ordered_json sj = ordered_json::parse(in, nullptr, false);
      if (sj.is_discarded()) fail(errc::parse_error, "invalid JSON in " + classify_spec);
      const MarginalSpec spec = io::spec_from_json(sj);
      VarSet universe;
      if (!classify_universe.empty())
        universe = parse_set(classify_universe);
      else if (classify_nvars > 0)
        universe = VarSet::range(classify_nvars);
      else
        for (const auto& mb : spec.margins) universe = universe | mb.margin;
      ordered_json j = envelope("classify", classify_spec);
      j["universe"] = io::varset_json(universe);
      j["result"] = io::classify_json(classify(spec, universe));
      if (!classify_c.table_path.empty()) {
        const Table t = io::parse_table(classify_c.table_path);
        j["params"] = io::mll_set_json(evaluate_spec(t, spec));
      }
      emit(std::move(j), classify_c.format, out);
      return 0;
    }

    if (gen->parsed()) {
      GenSpec spec;
      spec.levels = parse_levels(gen_levels);
      const auto mode = gen_mode_from_name(gen_mode);
      if (!mode) fail(errc::usage, "unknown mode " + gen_mode);
      spec.mode = *mode;
      spec.part = Partition{parse_set(gen_a), parse_set(gen_b), parse_set(gen_cset)};
      spec.seed = gen_seed;
      spec.concentration = gen_conc;
      if (!gen_assign.empty()) {
        std::ifstream in(gen_assign);
        if (!in) fail(errc::parse_error, "cannot open " + gen_assign);
        ordered_json aj = ordered_json::parse(in, nullptr, false);
        if (aj.is_discarded()) fail(errc::parse_error, "invalid JSON in " + gen_assign);
        spec.assign = io::assignment_from_json(aj);
      }
      const Table t = generate(spec);
      io::write_table(t, gen_out);
      ordered_json j = envelope("gen", std::nullopt);
      j["mode"] = gen_mode;
      j["seed"] = gen_seed;
      j["cells"] = t.cell_count();
      j["written"] = gen_out;
      j["digest"] = io::digest_file(gen_out);
      emit(std::move(j), gen_c.format, out);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }

  err << "error: no command\n";
  return 1;
}

}  // namespace mll

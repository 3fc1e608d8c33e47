#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "mll/collapse.hpp"
#include "mll/engine.hpp"
#include "mll/generator.hpp"
#include "mll/independence.hpp"
#include "mll/spec.hpp"
#include "mll/table.hpp"

namespace mll::io {

using ordered_json = nlohmann::ordered_json;

enum class Format { json, csv };

/// Reads a table file; the format is taken from the hint or the extension.
/// JSON carries either a dense row-major "weights" array (last listed
/// variable fastest) or a sparse "cells" list covering every index exactly
/// once. CSV has one level-index column per variable plus a final count
/// column, one row per cell. Weights that already sum to one are taken as
/// probabilities verbatim, so write-then-read is bit exact.
Table parse_table(const std::filesystem::path& path, std::optional<Format> hint = std::nullopt);

Table table_from_json(const ordered_json& j);
Table table_from_csv(const std::string& text);
ordered_json table_to_json(const Table& t);
void write_table(const Table& t, const std::filesystem::path& path);

MarginalSpec spec_from_json(const ordered_json& j);
std::vector<std::pair<VarSet, std::vector<double>>> assignment_from_json(const ordered_json& j);

/// FNV-1a 64 over the raw file bytes, hex encoded.
std::string digest_bytes(const std::string& bytes);
std::string digest_file(const std::filesystem::path& path);

// Report fragments (the command layer wraps them in a common envelope).
ordered_json varset_json(VarSet s);
ordered_json cell_json(const Cell& c);
ordered_json residual_json(const ResidualAt& r);
ordered_json collapse_report_json(const CollapseReport& rep);
ordered_json independence_json(const IndependenceVerdict& v);
ordered_json suite_json(const SuiteResult& s);
ordered_json decomposition_json(const Decomposition& d);
ordered_json classify_json(const ClassifyResult& c);
ordered_json mll_set_json(const MllSet& set);

}  // namespace mll::io

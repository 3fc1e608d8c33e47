#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mll/independence.hpp"
#include "mll/table.hpp"

namespace mll {

enum class GenMode { random, conditional_indep, joint_indep, mutual_indep, from_loglinear };

const char* gen_mode_name(GenMode m);
std::optional<GenMode> gen_mode_from_name(const std::string& s);

/// Deterministic table construction: same spec, same bits.
///
/// random draws every cell weight as exp(concentration * u), u uniform in
/// [-1, 1) from mt19937_64 (high 53 bits mapped to [0, 1)). Independence
/// modes draw each factor the same way in a documented order and multiply.
/// from_loglinear centers each prescribed interaction to zero-sum, sums,
/// exponentiates and normalizes; normalization only shifts the constant term.
struct GenSpec {
  std::vector<int> levels;
  GenMode mode = GenMode::random;
  Partition part;  // for the independence modes; groups must cover all variables
  std::vector<std::pair<VarSet, std::vector<double>>> assign;  // from_loglinear
  std::uint64_t seed = 0;
  double concentration = 1.0;
};

Table generate(const GenSpec& spec);

/// Projects raw interaction values onto effect coding: subtracts coordinate
/// means until every one-variable sum is below 1e-12.
std::vector<double> center_zero_sum(std::vector<double> values, const std::vector<int>& levels);

/// Seeded sweep: generates base with seeds seed, seed+1, ... and returns the
/// first table satisfying the predicate, or nothing within the budget.
std::optional<Table> find_witness(const std::function<bool(const Table&)>& predicate,
                                  const GenSpec& base, int budget);

/// Searches a one-parameter interaction family of 2x2x2 tables for one that
/// is strictly collapsible over the middle variable with respect to the
/// outer pair's interaction while that interaction stays away from zero (so
/// conditional independence fails). Bracket scan plus bisection on the
/// prescribed two-way value; deterministic in the seed.
std::optional<Table> find_collapsible_dependent_table(std::uint64_t seed, int budget = 200);

}  // namespace mll

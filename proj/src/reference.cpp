#include "mll/reference.hpp"

#include <cmath>

#include "mll/errors.hpp"

namespace mll::ref {

namespace {

void require_nested(const Table& t, VarSet L, VarSet M) {
  if (!M.subset_of(t.vars()))
    fail(errc::not_nested, "margin " + M.to_string() + " not within " + t.vars().to_string());
  if (!L.subset_of(M))
    fail(errc::not_nested, "effect " + L.to_string() + " not within margin " + M.to_string());
}

/// Mean of log of the margin table over the fiber agreeing with x on L.
double fiber_mean_log(const Table& margin, VarSet L, std::span<const int> x_L) {
  const VarSet M = margin.vars();
  const VarSet rest = M - L;
  Shape rest_shape(rest.empty() ? std::vector<int>{} : margin.levels_of(rest));

  std::vector<int> l_pos, rest_pos;
  int pos = 0;
  M.for_each([&](int v) {
    (L.contains(v) ? l_pos : rest_pos).push_back(pos);
    ++pos;
  });

  Cell full(M.size());
  for (std::size_t i = 0; i < l_pos.size(); ++i) full[l_pos[i]] = x_L[i];
  double sum = 0.0;
  rest_shape.for_each_cell([&](const Cell& rc, std::size_t) {
    for (std::size_t i = 0; i < rest_pos.size(); ++i) full[rest_pos[i]] = rc[i];
    sum += std::log(margin.p(full));
  });
  return sum / static_cast<double>(rest_shape.total());
}

}  // namespace

double nu(const Table& t, VarSet L, VarSet M, std::span<const int> x_L) {
  require_nested(t, L, M);
  return fiber_mean_log(marginalize(t, M), L, x_L);
}

double lambda(const Table& t, VarSet L, VarSet M, std::span<const int> x_L) {
  require_nested(t, L, M);
  const Table margin = marginalize(t, M);
  double acc = 0.0;
  for (VarSet sub : subsets_sorted(L)) {
    const Cell x_sub = project_cell(x_L, L, sub);
    const double sign = ((L.size() - sub.size()) % 2 == 0) ? 1.0 : -1.0;
    acc += sign * fiber_mean_log(margin, sub, x_sub);
  }
  return acc;
}

double lambda_indicator(const Table& t, VarSet L, VarSet M, std::span<const int> x_L) {
  require_nested(t, L, M);
  const Table margin = marginalize(t, M);

  std::vector<int> l_pos;
  int pos = 0;
  M.for_each([&](int v) {
    if (L.contains(v)) l_pos.push_back(pos);
    ++pos;
  });

  double acc = 0.0;
  margin.shape().for_each_cell([&](const Cell& y, std::size_t yi) {
    double w = 1.0;
    for (std::size_t i = 0; i < l_pos.size(); ++i) {
      const int levels = margin.levels()[l_pos[i]];
      w *= (y[l_pos[i]] == x_L[i] ? levels : 0) - 1;
    }
    acc += w * std::log(margin.p(yi));
  });
  return acc / static_cast<double>(margin.cell_count());
}

double lambda_binary_sign(const Table& t, VarSet L, VarSet M, std::span<const int> x_L) {
  require_nested(t, L, M);
  const Table margin = marginalize(t, M);
  for (int l : margin.levels())
    if (l != 2) fail(errc::not_binary, "margin " + M.to_string() + " has a non-binary variable");

  std::vector<int> l_pos;
  int pos = 0;
  M.for_each([&](int v) {
    if (L.contains(v)) l_pos.push_back(pos);
    ++pos;
  });

  double acc = 0.0;
  margin.shape().for_each_cell([&](const Cell& y, std::size_t yi) {
    int ones = 0;
    for (int p : l_pos) ones += y[p];
    acc += (ones % 2 == 0 ? 1.0 : -1.0) * std::log(margin.p(yi));
  });
  acc /= static_cast<double>(margin.cell_count());

  // The closed form fixes the all-zeros evaluation cell; other binary cells
  // differ only by the parity of their coordinate sum.
  int ones = 0;
  for (std::size_t i = 0; i < x_L.size(); ++i) ones += x_L[i];
  return (ones % 2 == 0 ? 1.0 : -1.0) * acc;
}

}  // namespace mll::ref

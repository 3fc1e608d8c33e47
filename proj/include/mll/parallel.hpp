#pragma once

#include <cstddef>

namespace mll {

/// Execution policy for the lattice kernels. Auto switches to OpenMP only
/// when the tensor is large enough for the fork overhead to pay off; results
/// are bitwise identical either way because every output entry is computed
/// independently with a fixed inner summation order.
enum class Execution { Serial, Parallel, Auto };

inline constexpr std::size_t parallel_grain = std::size_t{1} << 14;

inline bool use_parallel(Execution exec, std::size_t n) {
#ifdef _OPENMP
  if (exec == Execution::Parallel) return true;
  return exec == Execution::Auto && n >= parallel_grain;
#else
  (void)exec;
  (void)n;
  return false;
#endif
}

}  // namespace mll

#pragma once

#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace detaps {

// Execution policy for the data-parallel kernels. `Serial` is the reference
// path the tests compare against; `Parallel` uses OpenMP when available and
// otherwise falls back to the serial loop.
enum class Exec { Serial, Parallel };

// Runs fn(i) for i in [0, n). fn must not throw and must only write to
// per-index output slots.
template <typename Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
#if defined(_OPENMP)
  if (exec == Exec::Parallel && n > 1) {
    const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

inline int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace detaps

#pragma once

#include <cstddef>
#include <exception>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fedrf {

/// Runs f(0..n-1), across OpenMP threads when `parallel` is set and the
/// build has OpenMP.  Callers derive per-index RNG streams, so results are
/// identical in both modes; only scheduling differs.  The first exception
/// thrown by a task is rethrown after the loop.
template <typename F>
void parallel_for(size_t n, bool parallel, F&& f) {
#ifdef _OPENMP
  if (parallel && n > 1) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); i++) {
      try {
        f(static_cast<size_t>(i));
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    return;
  }
#else
  (void)parallel;
#endif
  for (size_t i = 0; i < n; i++) f(i);
}

inline bool parallel_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

inline int parallel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace fedrf

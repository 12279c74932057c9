#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ksobs {

// Thread-count control for the OpenMP kernels.  jobs <= 0 keeps the runtime
// default.  Every parallel kernel in this library writes to disjoint output
// slots, so results are bitwise independent of the thread count.
inline void set_jobs(int jobs) {
#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#else
  (void)jobs;
#endif
}

inline int max_jobs() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Index-parallel loop: body(i) for i in [0, n).  Used by the sweep and batch
// kernels; each iteration must only touch its own slot.
template <typename Body>
void parallel_for(std::ptrdiff_t n, const Body& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
#else
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace ksobs

#ifndef BCORR_PARALLEL_HPP
#define BCORR_PARALLEL_HPP

#include <cstddef>

#include <omp.h>

namespace bcorr {

// Execution mode for the data-parallel kernels.  Every kernel has a serial
// path that computes each index with exactly the same per-index code as the
// OpenMP path, so the two must agree bit for bit; the serial path is the
// reference that the tests and the benchmark compare against.
enum class ExecMode { serial, openmp };

inline int& max_threads_ref() {
  static int n = 0;  // 0 = let OpenMP decide
  return n;
}

inline void set_max_threads(int n) { max_threads_ref() = n; }

inline int effective_threads() {
  int cap = max_threads_ref();
  int hw = omp_get_max_threads();
  return (cap > 0 && cap < hw) ? cap : hw;
}

// Runs fn(i) for i in [0, n).  Results must be written to per-index slots;
// any reduction happens after the loop, in index order.
template <typename F>
void parallel_for(std::size_t n, F&& fn, ExecMode mode = ExecMode::openmp) {
  if (mode == ExecMode::serial || effective_threads() <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(dynamic) num_threads(effective_threads())
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    fn(static_cast<std::size_t>(i));
}

}  // namespace bcorr

#endif

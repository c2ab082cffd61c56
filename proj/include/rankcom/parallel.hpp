#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rankcom::par {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// Deterministic reduction: one partial per row computed independently, then
// accumulated serially in row order. The result is identical for any thread
// count, so --threads changes wall time but never outputs.
template <class T, class PerRow>
T row_reduce(int n, PerRow&& per_row) {
  std::vector<T> partial(static_cast<std::size_t>(n > 0 ? n : 0));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) partial[static_cast<std::size_t>(i)] = per_row(i);
  T total{};
  for (int i = 0; i < n; ++i) total += partial[static_cast<std::size_t>(i)];
  return total;
}

template <class PerRow>
double row_sum(int n, PerRow&& per_row) {
  return row_reduce<double>(n, per_row);
}

// Pair of accumulators reduced together (e.g. numerator/denominator).
struct Sum2 {
  double a = 0.0;
  double b = 0.0;
  Sum2& operator+=(const Sum2& o) {
    a += o.a;
    b += o.b;
    return *this;
  }
};

}  // namespace rankcom::par

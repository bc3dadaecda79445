#pragma once

#include <omp.h>

#include <cstdint>
#include <cstdlib>
#include <vector>

namespace stoqlab {

// STOQLAB_THREADS caps the OpenMP team size; unset means the OpenMP default.
inline int max_threads() {
  static int cached = [] {
    const char* env = std::getenv("STOQLAB_THREADS");
    if (env != nullptr) {
      int n = std::atoi(env);
      if (n >= 1) return n;
    }
    return omp_get_max_threads();
  }();
  return cached;
}

// Accumulates term(i) for i in [0,n) into a fixed grid of chunks and combines
// the chunk partials in index order. The chunk grid does not depend on the
// thread count, so the result is identical for any team size, including the
// serial reference below.
template <class T, class Term>
T chunked_sum(std::int64_t n, Term term, int chunks = 256) {
  if (n <= 0) return T{};
  if (static_cast<std::int64_t>(chunks) > n) chunks = static_cast<int>(n);
  std::vector<T> partial(chunks, T{});
  const std::int64_t per = (n + chunks - 1) / chunks;
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads())
  for (int c = 0; c < chunks; ++c) {
    const std::int64_t lo = c * per;
    const std::int64_t hi = (lo + per < n) ? lo + per : n;
    T acc{};
    for (std::int64_t i = lo; i < hi; ++i) acc += term(i);
    partial[c] = acc;
  }
  T total{};
  for (const T& p : partial) total += p;
  return total;
}

// Serial reference with the same chunk grid; kept for the kernel tests.
template <class T, class Term>
T chunked_sum_serial(std::int64_t n, Term term, int chunks = 256) {
  if (n <= 0) return T{};
  if (static_cast<std::int64_t>(chunks) > n) chunks = static_cast<int>(n);
  std::vector<T> partial(chunks, T{});
  const std::int64_t per = (n + chunks - 1) / chunks;
  for (int c = 0; c < chunks; ++c) {
    const std::int64_t lo = c * per;
    const std::int64_t hi = (lo + per < n) ? lo + per : n;
    T acc{};
    for (std::int64_t i = lo; i < hi; ++i) acc += term(i);
    partial[c] = acc;
  }
  T total{};
  for (const T& p : partial) total += p;
  return total;
}

template <class Body>
void parallel_for(std::int64_t n, Body body) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace stoqlab

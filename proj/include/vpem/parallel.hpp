#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vpem::parallel {

/// Global worker count used by parallel_for / accumulate_terms.
/// 1 selects the serial reference path. Values are clamped to [1, 256].
void set_threads(int n);
int threads();
int hardware_threads();

namespace detail {
inline std::atomic<int>& thread_count() {
  static std::atomic<int> n{0};  // 0 = use hardware default
  return n;
}
}  // namespace detail

inline void set_threads(int n) { detail::thread_count().store(std::clamp(n, 0, 256)); }

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline int threads() {
  int n = detail::thread_count().load();
  if (n <= 0) n = hardware_threads();
  return std::max(1, n);
}

/// Runs fn(i) for i in [0, count). Iterations must be independent.
/// Serial when threads() == 1; identical results for any thread count.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const int nt = threads();
  if (nt == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (long long i = 0; i < static_cast<long long>(count); ++i)
    fn(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < count; ++i) fn(i);
#endif
}

/// Sums term(0) + term(1) + ... + term(count - 1) into acc via acc += t.
///
/// Terms are evaluated in parallel in blocks but always combined in index
/// order, so the result is bit-identical to the serial loop for any thread
/// count. T must be default-constructible from `zero`.
template <class T, class TermFn>
void accumulate_terms(T& acc, std::size_t count, TermFn&& term) {
  const int nt = threads();
  if (nt == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) acc += term(i);
    return;
  }
  const std::size_t block = static_cast<std::size_t>(std::min(nt, 16));
  std::vector<T> slots(block);
  for (std::size_t start = 0; start < count; start += block) {
    const std::size_t m = std::min(block, count - start);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
#endif
    for (long long j = 0; j < static_cast<long long>(m); ++j)
      slots[static_cast<std::size_t>(j)] = term(start + static_cast<std::size_t>(j));
    for (std::size_t j = 0; j < m; ++j) acc += slots[j];  // fixed order
  }
}

}  // namespace vpem::parallel

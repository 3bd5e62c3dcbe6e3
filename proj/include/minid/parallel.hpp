#pragma once

// Deterministic Monte Carlo kernels.  Work items are addressed by index and
// draw from Rng::split(i), so results are bit-identical for every thread
// count; the *_serial variants are the reference implementations the OpenMP
// paths are tested and benchmarked against.  Work functions must not throw.

#include <cmath>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "minid/rng.hpp"

namespace minid::par {

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// requested <= 0 selects the library default.
inline int resolve_threads(int requested) {
  return requested > 0 ? requested : hardware_threads();
}

template <class F>
void for_each_serial(std::size_t n, const Rng& root, F&& f) {
  for (std::size_t i = 0; i < n; ++i) {
    Rng sub = root.split(i);
    f(i, sub);
  }
}

template <class F>
void for_each(std::size_t n, const Rng& root, int threads, F&& f) {
  threads = resolve_threads(threads);
#ifdef _OPENMP
  if (threads > 1) {
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      Rng sub = root.split(static_cast<std::uint64_t>(i));
      f(static_cast<std::size_t>(i), sub);
    }
    return;
  }
#endif
  for_each_serial(n, root, f);
}

template <class F>
std::vector<double> map_serial(std::size_t n, const Rng& root, F&& f) {
  std::vector<double> out(n);
  for_each_serial(n, root, [&](std::size_t i, Rng& r) { out[i] = f(i, r); });
  return out;
}

template <class F>
std::vector<double> map(std::size_t n, const Rng& root, int threads, F&& f) {
  std::vector<double> out(n);
  for_each(n, root, threads, [&](std::size_t i, Rng& r) { out[i] = f(i, r); });
  return out;
}

struct MeanSe {
  double mean = 0;
  double se = 0;
  std::size_t n = 0;
};

inline MeanSe summarize(const std::vector<double>& v) {
  MeanSe s;
  s.n = v.size();
  if (s.n == 0) return s;
  double acc = 0;
  for (double x : v) acc += x;
  s.mean = acc / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / (static_cast<double>(s.n) - 1.0) / static_cast<double>(s.n));
  }
  return s;
}

} // namespace minid::par

// Data-parallel loops over independent items. Every parallel loop writes to
// disjoint slots, so the OpenMP and serial paths produce identical bytes; the
// serial path stays around as the reference for tests and the benchmark.
#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace plattice {

enum class Exec { serial, parallel };

template <class F>
void for_each_index(std::size_t n, Exec exec, F&& fn) {
    if (exec == Exec::serial) {
        for (std::size_t j = 0; j < n; ++j) fn(j);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
    for (long long j = 0; j < static_cast<long long>(n); ++j) fn(static_cast<std::size_t>(j));
#else
    for (std::size_t j = 0; j < n; ++j) fn(j);
#endif
}

}  // namespace plattice

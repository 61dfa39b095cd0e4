#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gcomp {

/// Run f(i) for i in [0, n). threads <= 1 gives the plain serial loop that
/// the parallel path is tested against. Work items must be independent and
/// write only to their own slot; reductions happen afterwards in index
/// order, which keeps results identical for any thread count.
template <class F>
void parallel_for(std::int64_t n, int threads, F&& f) {
    if (threads <= 1) {
        for (std::int64_t i = 0; i < n; ++i) f(i);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) f(i);
#else
    for (std::int64_t i = 0; i < n; ++i) f(i);
#endif
}

/// Deterministic sum: fixed index order plus Kahan compensation.
template <class Vec>
double stable_sum(const Vec& values) {
    double sum = 0.0, comp = 0.0;
    for (double v : values) {
        double y = v - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace gcomp

#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cpband {

// Execution mode for the data-parallel kernels. Every kernel has a plain
// serial loop (the reference) and an OpenMP variant over the same per-element
// body. Elements write to disjoint slots only, so the two modes produce
// bit-identical results for any thread count; tests assert this and the
// benchmark target compares their throughput.
enum class Exec { Serial, Parallel };

namespace par {

template <typename Fn>
void for_each_index(std::int64_t n, Exec mode, Fn&& fn) {
    if (mode == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
#endif
    }
    for (std::int64_t i = 0; i < n; ++i) {
        fn(i);
    }
}

// Dynamic scheduling for loops with uneven per-element cost (iterative
// closest-point queries).
template <typename Fn>
void for_each_index_dynamic(std::int64_t n, Exec mode, Fn&& fn) {
    if (mode == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 32)
        for (std::int64_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
#endif
    }
    for (std::int64_t i = 0; i < n; ++i) {
        fn(i);
    }
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace par
} // namespace cpband

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vidcap {

// Runs fn(i) for i in [0, n). Iterations must be independent: each i owns its
// outputs, so results are identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        fn(static_cast<std::size_t>(i));
    }
#else
    for (std::size_t i = 0; i < n; ++i) {
        fn(i);
    }
#endif
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace vidcap

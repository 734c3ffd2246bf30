// SPDX-License-Identifier: Apache-2.0
#include "vidcap/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vidcap::kernels {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr long long kParallelFlopThreshold = 64 * 1024;

inline bool worth_parallel(int rows, long long flops) {
#ifdef _OPENMP
    return rows > 1 && flops >= kParallelFlopThreshold && omp_get_max_threads() > 1;
#else
    (void)rows;
    (void)flops;
    return false;
#endif
}

inline void matmul_row(const double* a, const double* b, double* c, int k, int n) {
    for (int j = 0; j < n; ++j) c[j] = 0.0;
    for (int l = 0; l < k; ++l) {
        const double av = a[l];
        const double* brow = b + static_cast<std::size_t>(l) * n;
        for (int j = 0; j < n; ++j) c[j] += av * brow[j];
    }
}

inline void nt_acc_row(const double* dc, const double* b, double* da, int k, int n) {
    for (int j = 0; j < k; ++j) {
        const double* brow = b + static_cast<std::size_t>(j) * n;
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += dc[l] * brow[l];
        da[j] += acc;
    }
}

inline void tn_acc_row(const double* a, const double* dc, double* db, int m, int k, int n,
                       int j) {
    double* dbrow = db + static_cast<std::size_t>(j) * n;
    for (int i = 0; i < m; ++i) {
        const double av = a[static_cast<std::size_t>(i) * k + j];
        const double* dcrow = dc + static_cast<std::size_t>(i) * n;
        for (int l = 0; l < n; ++l) dbrow[l] += av * dcrow[l];
    }
}

}  // namespace

void matmul_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        matmul_row(a.data() + static_cast<std::size_t>(i) * k, b.data(),
                   c.data() + static_cast<std::size_t>(i) * n, k, n);
    }
}

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, int m,
            int k, int n) {
    if (!worth_parallel(m, 2LL * m * k * n)) {
        matmul_serial(a, b, c, m, k, n);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < m; ++i) {
        matmul_row(a.data() + static_cast<std::size_t>(i) * k, b.data(),
                   c.data() + static_cast<std::size_t>(i) * n, k, n);
    }
}

void matmul_nt_acc_serial(std::span<const double> dc, std::span<const double> b,
                          std::span<double> da, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        nt_acc_row(dc.data() + static_cast<std::size_t>(i) * n, b.data(),
                   da.data() + static_cast<std::size_t>(i) * k, k, n);
    }
}

void matmul_nt_acc(std::span<const double> dc, std::span<const double> b, std::span<double> da,
                   int m, int k, int n) {
    if (!worth_parallel(m, 2LL * m * k * n)) {
        matmul_nt_acc_serial(dc, b, da, m, k, n);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < m; ++i) {
        nt_acc_row(dc.data() + static_cast<std::size_t>(i) * n, b.data(),
                   da.data() + static_cast<std::size_t>(i) * k, k, n);
    }
}

void matmul_tn_acc_serial(std::span<const double> a, std::span<const double> dc,
                          std::span<double> db, int m, int k, int n) {
    for (int j = 0; j < k; ++j) {
        tn_acc_row(a.data(), dc.data(), db.data(), m, k, n, j);
    }
}

void matmul_tn_acc(std::span<const double> a, std::span<const double> dc, std::span<double> db,
                   int m, int k, int n) {
    if (!worth_parallel(k, 2LL * m * k * n)) {
        matmul_tn_acc_serial(a, dc, db, m, k, n);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int j = 0; j < k; ++j) {
        tn_acc_row(a.data(), dc.data(), db.data(), m, k, n, j);
    }
}

}  // namespace vidcap::kernels

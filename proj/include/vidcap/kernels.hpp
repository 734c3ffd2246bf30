// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace vidcap::kernels {

// Dense double-precision kernels behind the tensor ops. Each kernel has a
// serial reference twin used by the tests; the OpenMP versions split work by
// output row so every element is produced by exactly one thread with the same
// inner-loop order as the reference, keeping results bit-identical for any
// thread count.

// c = a * b, a is m x k, b is k x n, c is m x n.
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, int m,
            int k, int n);
void matmul_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   int m, int k, int n);

// da += dc * b^T, dc is m x n, b is k x n, da is m x k.
void matmul_nt_acc(std::span<const double> dc, std::span<const double> b, std::span<double> da,
                   int m, int k, int n);
void matmul_nt_acc_serial(std::span<const double> dc, std::span<const double> b,
                          std::span<double> da, int m, int k, int n);

// db += a^T * dc, a is m x k, dc is m x n, db is k x n.
void matmul_tn_acc(std::span<const double> a, std::span<const double> dc, std::span<double> db,
                   int m, int k, int n);
void matmul_tn_acc_serial(std::span<const double> a, std::span<const double> dc,
                          std::span<double> db, int m, int k, int n);

}  // namespace vidcap::kernels

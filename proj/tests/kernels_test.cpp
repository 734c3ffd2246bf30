// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>
#include <tuple>
#include <vector>

#include "vidcap/kernels.hpp"

using namespace vidcap;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("matmul matches serial reference bit-exactly") {
    std::mt19937_64 rng(1234);
    const std::vector<std::tuple<int, int, int>> shapes = {
        {1, 3, 2}, {7, 5, 9}, {64, 48, 96}, {129, 65, 33}};
    for (auto [m, k, n] : shapes) {
        auto a = random_vec(static_cast<std::size_t>(m) * k, rng);
        auto b = random_vec(static_cast<std::size_t>(k) * n, rng);
        std::vector<double> c_par(static_cast<std::size_t>(m) * n, 0.0);
        std::vector<double> c_ser(static_cast<std::size_t>(m) * n, 0.0);
        kernels::matmul(a, b, c_par, m, k, n);
        kernels::matmul_serial(a, b, c_ser, m, k, n);
        CHECK(c_par == c_ser);
    }
}

TEST_CASE("matmul hand example 2x3 by 3x1") {
    // [[1 2 3],[4 5 6]] * [1 0 2]^T = [7, 16]
    std::vector<double> a = {1, 2, 3, 4, 5, 6};
    std::vector<double> b = {1, 0, 2};
    std::vector<double> c(2, 0.0);
    kernels::matmul(a, b, c, 2, 3, 1);
    CHECK(c[0] == doctest::Approx(7.0));
    CHECK(c[1] == doctest::Approx(16.0));
}

TEST_CASE("backward accumulation kernels match serial twins") {
    std::mt19937_64 rng(99);
    const int m = 33, k = 17, n = 41;
    auto a = random_vec(static_cast<std::size_t>(m) * k, rng);
    auto dc = random_vec(static_cast<std::size_t>(m) * n, rng);
    auto b = random_vec(static_cast<std::size_t>(k) * n, rng);

    auto da_par = random_vec(static_cast<std::size_t>(m) * k, rng);
    auto da_ser = da_par;
    kernels::matmul_nt_acc(dc, b, da_par, m, k, n);
    kernels::matmul_nt_acc_serial(dc, b, da_ser, m, k, n);
    CHECK(da_par == da_ser);

    auto db_par = random_vec(static_cast<std::size_t>(k) * n, rng);
    auto db_ser = db_par;
    kernels::matmul_tn_acc(a, dc, db_par, m, k, n);
    kernels::matmul_tn_acc_serial(a, dc, db_ser, m, k, n);
    CHECK(db_par == db_ser);
}

TEST_CASE("accumulation kernels agree with direct matmul algebra") {
    std::mt19937_64 rng(7);
    const int m = 5, k = 4, n = 6;
    auto a = random_vec(static_cast<std::size_t>(m) * k, rng);
    auto b = random_vec(static_cast<std::size_t>(k) * n, rng);
    auto dc = random_vec(static_cast<std::size_t>(m) * n, rng);

    // da = dc * b^T, element by element.
    std::vector<double> da(static_cast<std::size_t>(m) * k, 0.0);
    kernels::matmul_nt_acc(dc, b, da, m, k, n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < k; ++j) {
            double want = 0.0;
            for (int l = 0; l < n; ++l) want += dc[i * n + l] * b[j * n + l];
            CHECK(da[i * k + j] == doctest::Approx(want).epsilon(1e-12));
        }
    }

    // db = a^T * dc.
    std::vector<double> db(static_cast<std::size_t>(k) * n, 0.0);
    kernels::matmul_tn_acc(a, dc, db, m, k, n);
    for (int j = 0; j < k; ++j) {
        for (int l = 0; l < n; ++l) {
            double want = 0.0;
            for (int i = 0; i < m; ++i) want += a[i * k + j] * dc[i * n + l];
            CHECK(db[j * n + l] == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

}  // TEST_SUITE

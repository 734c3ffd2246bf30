// SPDX-License-Identifier: Apache-2.0
#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "vidcap/embedding.hpp"

using namespace vidcap;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = "embtest_" + std::to_string(counter++) + ".vec";
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("load reads tokens and vectors back") {
    TempFile f("2 3\ncat 1 0 0\ndog 0 1 0\n");
    const auto table = EmbeddingTable::load(f.path);
    CHECK(table.size() == 2);
    CHECK(table.dim() == 3);
    REQUIRE(table.find("cat") != nullptr);
    CHECK((*table.find("cat"))[0] == 1.0);
    REQUIRE(table.find("dog") != nullptr);
    CHECK((*table.find("dog"))[1] == 1.0);
}

TEST_CASE("load with limit truncates") {
    TempFile f("2 3\ncat 1 0 0\ndog 0 1 0\n");
    const auto table = EmbeddingTable::load(f.path, 1);
    CHECK(table.size() == 1);
    CHECK(table.contains("cat"));
    CHECK_FALSE(table.contains("dog"));
}

TEST_CASE("dimensionality mismatch is an error") {
    TempFile f("1 3\ncat 1 0\n");
    CHECK_THROWS_AS(EmbeddingTable::load(f.path), std::invalid_argument);
}

TEST_CASE("non-numeric component is an error") {
    TempFile f("1 3\ncat 1 zero 0\n");
    CHECK_THROWS_AS(EmbeddingTable::load(f.path), std::invalid_argument);
}

TEST_CASE("missing file is an error") {
    CHECK_THROWS_AS(EmbeddingTable::load("no_such_file.vec"), std::invalid_argument);
}

TEST_CASE("similarity basics") {
    TempFile f("3 2\nx 1 0\ny 0 1\nd 1 1\n");
    const auto table = EmbeddingTable::load(f.path);
    CHECK(table.similarity("x", "x") == doctest::Approx(1.0));
    CHECK(table.similarity("x", "y") == doctest::Approx(0.0));
    CHECK(table.similarity("d", "x") == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("distance is one minus similarity, with the documented range") {
    TempFile f("3 2\nx 1 0\nnx -1 0\ny 0 1\n");
    const auto table = EmbeddingTable::load(f.path);
    CHECK(table.distance("x", "x") == 0.0);
    CHECK(table.distance("x", "y") == doctest::Approx(1.0));
    CHECK(table.distance("x", "nx") == doctest::Approx(2.0));
}

TEST_CASE("missing token and zero vector throw") {
    TempFile f("2 2\nx 1 0\nz 0 0\n");
    const auto table = EmbeddingTable::load(f.path);
    CHECK_THROWS_AS(table.similarity("x", "nope"), std::out_of_range);
    CHECK_THROWS_AS(table.similarity("x", "z"), std::invalid_argument);
}

TEST_CASE("stem fallback lookup") {
    TempFile f("1 2\nride 1 0\n");
    const auto table = EmbeddingTable::load(f.path);
    CHECK(table.find_with_stem_fallback("ride") != nullptr);
    // "riding" is absent as a surface form; its Porter stem is present.
    CHECK(table.find_with_stem_fallback("riding") != nullptr);
    CHECK(table.find_with_stem_fallback("horse") == nullptr);
}

TEST_CASE("property: similarity is symmetric and scale-invariant") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::uniform_real_distribution<double> scale_dist(0.1, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(5), b(5);
        for (auto& v : a) v = dist(rng);
        for (auto& v : b) v = dist(rng);
        double na = 0.0, nb = 0.0;
        for (double v : a) na += v * v;
        for (double v : b) nb += v * v;
        if (na == 0.0 || nb == 0.0) continue;

        const double s1 = cosine(a, b);
        const double s2 = cosine(b, a);
        CHECK(std::abs(s1 - s2) <= 1e-12);
        CHECK(s1 >= -1.0 - 1e-12);
        CHECK(s1 <= 1.0 + 1e-12);

        const double c = scale_dist(rng);
        std::vector<double> a_scaled = a;
        for (auto& v : a_scaled) v *= c;
        CHECK(std::abs(cosine(a_scaled, b) - s1) <= 1e-9);
    }
}

}  // TEST_SUITE

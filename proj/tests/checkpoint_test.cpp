// SPDX-License-Identifier: Apache-2.0
#include <stdexcept>
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "vidcap/checkpoint.hpp"

using namespace vidcap;

TEST_SUITE("checkpoint") {

TEST_CASE("named tensors round-trip bit-exactly") {
    ad::Tensor a({2, 3}, false);
    a.val = {1.0, -2.5, 3.25, 1e-17, -0.0, 4.0};
    ad::Tensor b({4}, false);
    b.val = {0.5, 0.25, -0.125, 1e300};

    const std::string path = "ckpt_test.bin";
    save_tensors(path, {{"layer.w", &a}, {"layer.b", &b}});
    const auto loaded = load_tensors(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded.at("layer.w").shape == a.shape);
    CHECK(loaded.at("layer.w").val == a.val);
    CHECK(loaded.at("layer.b").shape == b.shape);
    CHECK(loaded.at("layer.b").val == b.val);
    std::remove(path.c_str());
}

TEST_CASE("missing and truncated files are errors") {
    CHECK_THROWS_AS(load_tensors("no_such_ckpt.bin"), std::invalid_argument);

    ad::Tensor a({8}, false);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (auto& v : a.val) v = dist(rng);
    const std::string path = "ckpt_trunc_test.bin";
    save_tensors(path, {{"w", &a}});
    // Chop the file mid-data.
    {
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 11));
    }
    CHECK_THROWS_AS(load_tensors(path), std::runtime_error);
    std::remove(path.c_str());
}

}  // TEST_SUITE

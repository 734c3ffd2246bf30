// SPDX-License-Identifier: Apache-2.0
#include <stdexcept>
#include <doctest.h>

#include <cmath>

#include "vidcap/config.hpp"
#include "vidcap/trainer.hpp"

using namespace vidcap;

TEST_SUITE("trainer") {

TEST_CASE("adam leaves parameters unchanged on zero gradient") {
    ad::Tensor w({3}, true);
    w.val = {1.0, -2.0, 3.0};
    w.zero_grad();
    AdamState state;
    adam_step({&w}, state, 0.1);
    CHECK(w.val == std::vector<double>{1.0, -2.0, 3.0});
}

TEST_CASE("adam first step matches the hand-traced update") {
    ad::Tensor w({1}, true);
    w.val = {0.5};
    w.grad = {0.2};
    AdamState state;
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    adam_step({&w}, state, lr, b1, b2, eps);
    // m = 0.1*g, v = 0.001*g^2; m_hat = g, v_hat = g^2; step = lr*g/(|g|+eps)
    const double m = (1 - b1) * 0.2;
    const double v = (1 - b2) * 0.2 * 0.2;
    const double m_hat = m / (1 - b1);
    const double v_hat = v / (1 - b2);
    const double want = 0.5 - lr * m_hat / (std::sqrt(v_hat) + eps);
    CHECK(w.val[0] == doctest::Approx(want).epsilon(1e-15));
    CHECK(w.val[0] < 0.5);  // moved against the gradient sign
}

TEST_CASE("adam two steps match a hand-traced sequence") {
    ad::Tensor w({1}, true);
    w.val = {1.0};
    AdamState state;
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double g1 = 0.3, g2 = -0.1;

    double m = 0.0, v = 0.0, x = 1.0;
    m = b1 * m + (1 - b1) * g1;
    v = b2 * v + (1 - b2) * g1 * g1;
    x -= lr * (m / (1 - b1)) / (std::sqrt(v / (1 - b2)) + eps);
    m = b1 * m + (1 - b1) * g2;
    v = b2 * v + (1 - b2) * g2 * g2;
    x -= lr * (m / (1 - std::pow(b1, 2))) / (std::sqrt(v / (1 - std::pow(b2, 2))) + eps);

    w.grad = {g1};
    adam_step({&w}, state, lr, b1, b2, eps);
    w.grad = {g2};
    adam_step({&w}, state, lr, b1, b2, eps);
    CHECK(w.val[0] == doctest::Approx(x).epsilon(1e-14));
}

TEST_CASE("adam rejects non-finite gradients") {
    ad::Tensor w({1}, true);
    w.val = {1.0};
    w.grad = {std::numeric_limits<double>::infinity()};
    AdamState state;
    CHECK_THROWS_AS(adam_step({&w}, state, 0.1), std::runtime_error);
}

TEST_CASE("clipping scales only above the threshold") {
    ad::Tensor a({2}, true), b({1}, true);

    // norm 3 with max 5: unchanged
    a.grad = {3.0, 0.0};
    b.grad = {0.0};
    CHECK(clip_gradients({&a, &b}, 5.0) == doctest::Approx(3.0));
    CHECK(a.grad[0] == 3.0);

    // norm 10 with max 5: halved, post-clip norm 5
    a.grad = {8.0, 0.0};
    b.grad = {6.0};
    const double post = clip_gradients({&a, &b}, 5.0);
    CHECK(post == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(a.grad[0] == doctest::Approx(4.0));
    CHECK(b.grad[0] == doctest::Approx(3.0));
    double sq = a.grad[0] * a.grad[0] + a.grad[1] * a.grad[1] + b.grad[0] * b.grad[0];
    CHECK(std::sqrt(sq) == doctest::Approx(5.0).epsilon(1e-9));

    // zero grads: unchanged
    a.grad = {0.0, 0.0};
    b.grad = {0.0};
    CHECK(clip_gradients({&a, &b}, 5.0) == 0.0);
    CHECK(a.grad[0] == 0.0);
}

TEST_CASE("scheduled sampling probability decays linearly to the floor") {
    CHECK(scheduled_sampling_prob(0, 10, 0.75) == doctest::Approx(1.0));
    CHECK(scheduled_sampling_prob(9, 10, 0.75) == doctest::Approx(0.75));
    // midpoint of an odd-length schedule
    CHECK(scheduled_sampling_prob(5, 11, 0.75) == doctest::Approx(0.875));
    CHECK(scheduled_sampling_prob(0, 1, 0.75) == doctest::Approx(1.0));
    CHECK_THROWS_AS(scheduled_sampling_prob(0, 10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(scheduled_sampling_prob(0, 10, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(scheduled_sampling_prob(10, 10, 0.5), std::invalid_argument);
}

TEST_CASE("train config parses the documented keys") {
    const auto kv = KeyValueConfig::parse_text(
        "learning_rate = 0.001\n"
        "clip_norm = 5\n"
        "batch_size = 4\n"
        "epochs = 3\n"
        "seed = 42\n"
        "lambda_acl = 0.01\n"
        "lambda_fcl = 0.1\n"
        "lambda_mcl = 0.01\n"
        "lambda_ocl = 0.1\n"
        "lambda_c = 0.5\n"
        "lambda_a = 0.5\n"
        "lambda_o = 0.5\n"
        "strategy = scheduled_sampling\n"
        "ss_floor = 0.8\n"
        "d = 16\n"
        "e = 8\n"
        "m = 12\n"
        "vocab_min_count = 1\n");
    const auto tc = TrainConfig::from_config(kv);
    CHECK(tc.learning_rate == doctest::Approx(0.001));
    CHECK(tc.batch_size == 4);
    CHECK(tc.epochs == 3);
    CHECK(tc.seed == 42);
    CHECK(tc.strategy == "scheduled_sampling");
    CHECK(tc.ss_floor == doctest::Approx(0.8));
    CHECK(tc.d == 16);
    CHECK(tc.e == 8);
    CHECK(tc.m == 12);
    CHECK(tc.vocab_min_count == 1);
}

TEST_CASE("train config rejects bad values") {
    CHECK_THROWS_AS(TrainConfig::from_config(KeyValueConfig::parse_text("strategy = nonsense\n")),
                    std::invalid_argument);
    CHECK_THROWS_AS(TrainConfig::from_config(KeyValueConfig::parse_text("ss_floor = 0\n")),
                    std::invalid_argument);
    CHECK_THROWS_AS(TrainConfig::from_config(KeyValueConfig::parse_text("epochs = 0\n")),
                    std::invalid_argument);
    CHECK_THROWS_AS(KeyValueConfig::parse_text("novalue\n"), std::invalid_argument);
    CHECK_THROWS_AS(KeyValueConfig::parse_text("a = 1\na = 2\n"), std::invalid_argument);
}

}  // TEST_SUITE

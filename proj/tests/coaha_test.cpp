// SPDX-License-Identifier: Apache-2.0
#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

#include "vidcap/coaha.hpp"

using namespace vidcap;

namespace {

// Mini embedding table used throughout: man at 45 degrees, motorcycl at 0,
// hors at 90. Distances are then exact closed forms.
EmbeddingTable mini_table() {
    return EmbeddingTable(2, {
                                 {"man", {0.7071, 0.7071}},
                                 {"motorcycl", {1.0, 0.0}},
                                 {"hors", {0.0, 1.0}},
                             });
}

Lexica mini_lexica() {
    return build_lexica({"a man is riding a motorcycle"}, {"horse"}, {});
}

ReferenceSet mini_ref() {
    ReferenceSet ref;
    ref.video_id = "v0";
    ref.object_stems = {"man", "motorcycl"};
    ref.action_stems = {"ride"};
    ref.mean_len = 6.0;
    return ref;
}

}  // namespace

TEST_SUITE("coaha") {

TEST_CASE("hallucinated_sets is exact stem-set difference") {
    const auto ref = mini_ref();
    auto [h_o, h_a] = hallucinated_sets({"man", "hors"}, {}, ref);
    CHECK(h_o == std::set<std::string>{"hors"});
    CHECK(h_a.empty());

    auto [h_o2, h_a2] = hallucinated_sets({"man", "motorcycl"}, {"ride"}, ref);
    CHECK(h_o2.empty());
    CHECK(h_a2.empty());

    auto [h_o3, h_a3] = hallucinated_sets({}, {}, ref);
    CHECK(h_o3.empty());
    CHECK(h_a3.empty());
}

TEST_CASE("mean_semantic_distance hand example") {
    const auto table = mini_table();
    // d(hors, man) = 1 - cos(90deg - 45deg) = 1 - 1/sqrt(2); d(hors, motorcycl) = 1.
    const double want = ((1.0 - 1.0 / std::sqrt(2.0)) + 1.0) / 2.0;
    bool oov = true;
    const double got = mean_semantic_distance("hors", {"man", "motorcycl"}, table, &oov);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got == doctest::Approx(0.64645).epsilon(1e-4));
    CHECK_FALSE(oov);
}

TEST_CASE("mean_semantic_distance includes zero self-term") {
    const auto table = mini_table();
    const double d = mean_semantic_distance("man", {"man"}, table);
    CHECK(d == doctest::Approx(0.0));
}

TEST_CASE("mean_semantic_distance fallbacks") {
    const auto table = mini_table();
    bool oov = false;
    CHECK(mean_semantic_distance("man", {}, table, &oov) == 1.0);
    CHECK(oov);
    oov = false;
    CHECK(mean_semantic_distance("zebra", {"man"}, table, &oov) == 1.0);
    CHECK(oov);
}

TEST_CASE("score_instance: identical caption scores zero") {
    const auto rep =
        score_instance("a man is riding a motorcycle", mini_ref(), mini_lexica(), mini_table());
    CHECK(rep.oh == 0.0);
    CHECK(rep.ah == 0.0);
    CHECK(rep.coaha == 0.0);
    CHECK(rep.hallucinated_objects.empty());
    CHECK(rep.hallucinated_actions.empty());
}

TEST_CASE("score_instance: worked horse example") {
    const auto rep =
        score_instance("a man is riding a horse", mini_ref(), mini_lexica(), mini_table());
    const double mean_d = ((1.0 - 1.0 / std::sqrt(2.0)) + 1.0) / 2.0;
    const double want_oh = 100.0 * mean_d / 6.0;
    CHECK(rep.hallucinated_objects == std::set<std::string>{"hors"});
    CHECK(rep.oh == doctest::Approx(want_oh).epsilon(1e-12));
    CHECK(rep.oh == doctest::Approx(10.774).epsilon(1e-4));
    CHECK(rep.ah == 0.0);
    CHECK(rep.coaha == rep.oh);
    CHECK(rep.raw_oh == doctest::Approx(mean_d / 6.0).epsilon(1e-12));
}

TEST_CASE("score_instance: no lexica terms gives empty zero report") {
    const auto rep = score_instance("hello world", mini_ref(), mini_lexica(), mini_table());
    CHECK(rep.coaha == 0.0);
    CHECK(rep.hallucinated_objects.empty());
    CHECK(rep.hallucinated_actions.empty());
}

TEST_CASE("score_instance rejects non-positive mean length") {
    auto ref = mini_ref();
    ref.mean_len = 0.0;
    CHECK_THROWS_AS(score_instance("a man", ref, mini_lexica(), mini_table()),
                    std::invalid_argument);
}

TEST_CASE("coaha equals oh plus ah exactly") {
    auto lex = mini_lexica();
    lex.actions.insert("eat");
    auto table = EmbeddingTable(2, {
                                       {"man", {0.7071, 0.7071}},
                                       {"motorcycl", {1.0, 0.0}},
                                       {"hors", {0.0, 1.0}},
                                       {"eat", {-1.0, 0.3}},
                                       {"ride", {0.9, 0.1}},
                                   });
    const auto rep = score_instance("a man is eating a horse", mini_ref(), lex, table);
    CHECK(rep.oh > 0.0);
    CHECK(rep.ah > 0.0);
    CHECK(rep.coaha == rep.oh + rep.ah);  // exact, same arithmetic path
}

TEST_CASE("monotonicity: one more hallucinated object strictly increases OH") {
    auto lex = mini_lexica();
    lex.objects.insert("zebra");  // OOV in the table: neutral distance 1
    const auto base =
        score_instance("a man is riding a horse", mini_ref(), lex, mini_table());
    const auto more =
        score_instance("a man is riding a horse with a zebra", mini_ref(), lex, mini_table());
    CHECK(more.oh > base.oh);
    CHECK(more.coaha > base.coaha);
    CHECK(more.oov_terms == std::set<std::string>{"zebra"});
}

TEST_CASE("T-scaling: doubling mean reference length halves OH and AH") {
    auto ref = mini_ref();
    const auto rep1 =
        score_instance("a man is riding a horse", ref, mini_lexica(), mini_table());
    ref.mean_len = 12.0;
    const auto rep2 =
        score_instance("a man is riding a horse", ref, mini_lexica(), mini_table());
    CHECK(rep2.oh == doctest::Approx(rep1.oh / 2.0).epsilon(1e-12));
}

TEST_CASE("synonym sensitivity: closer hallucinated term scores lower") {
    // relate ~ ride (cos 0.995), unrelated ~ orthogonal.
    auto lex = build_lexica({"a man is riding a motorcycle"}, {},
                            {"relating", "wandering"});
    auto table = EmbeddingTable(2, {
                                       {"man", {0.7071, 0.7071}},
                                       {"motorcycl", {1.0, 0.0}},
                                       {"ride", {1.0, 0.1}},
                                       {"relat", {1.0, 0.2}},
                                       {"wander", {-0.1, 1.0}},
                                   });
    const auto ref = mini_ref();
    const auto related = score_instance("a man is relating a motorcycle", ref, lex, table);
    const auto unrelated = score_instance("a man is wandering a motorcycle", ref, lex, table);
    CHECK(related.ah > 0.0);
    CHECK(unrelated.ah > related.ah);
}

TEST_CASE("score_corpus aggregates arithmetic means") {
    const auto lex = mini_lexica();
    const auto table = mini_table();
    std::map<std::string, ReferenceSet> refs;
    refs["v0"] = mini_ref();
    auto r1 = mini_ref();
    r1.video_id = "v1";
    refs["v1"] = r1;

    std::map<std::string, std::string> candidates = {
        {"v0", "a man is riding a motorcycle"},
        {"v1", "a man is riding a horse"},
    };
    const auto corpus = score_corpus(candidates, refs, lex, table);
    REQUIRE(corpus.per_instance.size() == 2);
    const double want_mean =
        (corpus.per_instance[0].coaha + corpus.per_instance[1].coaha) / 2.0;
    CHECK(corpus.mean_coaha == doctest::Approx(want_mean).epsilon(1e-12));
    CHECK(corpus.per_instance[0].coaha == 0.0);
    CHECK(corpus.per_instance[1].coaha > 0.0);
}

TEST_CASE("score_corpus: single instance mean equals the instance") {
    const auto lex = mini_lexica();
    const auto table = mini_table();
    std::map<std::string, ReferenceSet> refs{{"v0", mini_ref()}};
    std::map<std::string, std::string> candidates{{"v0", "a man is riding a horse"}};
    const auto corpus = score_corpus(candidates, refs, lex, table);
    CHECK(corpus.mean_coaha == doctest::Approx(corpus.per_instance[0].coaha));
}

TEST_CASE("score_corpus rejects empty input and missing references") {
    const auto lex = mini_lexica();
    const auto table = mini_table();
    std::map<std::string, ReferenceSet> refs{{"v0", mini_ref()}};
    CHECK_THROWS_AS(score_corpus({}, refs, lex, table), std::invalid_argument);
    CHECK_THROWS_AS(score_corpus({{"vX", "a man"}}, refs, lex, table), std::invalid_argument);
}

}  // TEST_SUITE

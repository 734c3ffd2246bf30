// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vidcap/lexicon.hpp"

using namespace vidcap;

TEST_SUITE("lexicon") {

TEST_CASE("porter stemmer matches the published reference pairs") {
    // Expected values derived with an independent transcription of the
    // original Porter (1980) rules, anchored on the algorithm's own worked
    // examples (oscillators -> oscil, generalizations -> gener).
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"oscillators", "oscil"},
        {"generalizations", "gener"},
        // step 1a
        {"caresses", "caress"},
        {"ponies", "poni"},
        {"ties", "ti"},
        {"caress", "caress"},
        {"cats", "cat"},
        // step 1b and its repair rules
        {"feed", "feed"},
        {"agreed", "agre"},
        {"plastered", "plaster"},
        {"bled", "bled"},
        {"motoring", "motor"},
        {"sing", "sing"},
        {"conflated", "conflat"},
        {"troubled", "troubl"},
        {"sized", "size"},
        {"hopping", "hop"},
        {"tanned", "tan"},
        {"falling", "fall"},
        {"hissing", "hiss"},
        {"fizzed", "fizz"},
        {"failing", "fail"},
        {"filing", "file"},
        {"riding", "ride"},
        // step 1c
        {"happy", "happi"},
        {"sky", "sky"},
        // step 2
        {"relational", "relat"},
        {"conditional", "condit"},
        {"rational", "ration"},
        {"valenci", "valenc"},
        {"hesitanci", "hesit"},
        {"digitizer", "digit"},
        {"conformabli", "conform"},
        {"radicalli", "radic"},
        {"differentli", "differ"},
        {"vileli", "vile"},
        {"analogousli", "analog"},
        {"vietnamization", "vietnam"},
        {"predication", "predic"},
        {"operator", "oper"},
        {"feudalism", "feudal"},
        {"decisiveness", "decis"},
        {"hopefulness", "hope"},
        {"callousness", "callous"},
        {"formaliti", "formal"},
        {"sensitiviti", "sensit"},
        {"sensibiliti", "sensibl"},
        // step 3
        {"triplicate", "triplic"},
        {"formative", "form"},
        {"formalize", "formal"},
        {"electriciti", "electr"},
        {"electrical", "electr"},
        {"hopeful", "hope"},
        {"goodness", "good"},
        // step 4
        {"revival", "reviv"},
        {"allowance", "allow"},
        {"inference", "infer"},
        {"airliner", "airlin"},
        {"gyroscopic", "gyroscop"},
        {"adjustable", "adjust"},
        {"defensible", "defens"},
        {"irritant", "irrit"},
        {"replacement", "replac"},
        {"adjustment", "adjust"},
        {"dependent", "depend"},
        {"adoption", "adopt"},
        {"homologou", "homolog"},
        {"communism", "commun"},
        {"activate", "activ"},
        {"angulariti", "angular"},
        {"homologous", "homolog"},
        {"effective", "effect"},
        {"bowdlerize", "bowdler"},
        // step 5
        {"probate", "probat"},
        {"rate", "rate"},
        {"cease", "ceas"},
        {"controll", "control"},
        {"roll", "roll"},
        // domain words
        {"motorcycle", "motorcycl"},
        {"playing", "plai"},
        {"plays", "plai"},
        {"horse", "hors"},
        {"eating", "eat"},
        {"running", "run"},
        {"swimming", "swim"},
        {"driving", "drive"},
        {"flying", "fly"},
        {"monkey", "monkei"},
        {"toy", "toi"},
    };
    for (const auto& [word, want] : pairs) {
        CAPTURE(word);
        CHECK(porter_stem(word) == want);
    }
}

TEST_CASE("porter stemmer is total") {
    CHECK(porter_stem("don't") == "don't");  // non-alphabetic: unchanged
    CHECK(porter_stem("Cats") == "Cats");    // not lowercase: unchanged
    CHECK(porter_stem("a") == "a");
    CHECK(porter_stem("is") == "is");
    CHECK(porter_stem("") == "");
}

TEST_CASE("porter stemmer is idempotent on its own outputs") {
    const std::vector<std::string> vocab = {
        "riding",  "caresses", "cats",  "ponies",   "relational", "activate", "playing",
        "falling", "happy",    "sized", "adoption", "motorcycle", "effective"};
    for (const auto& w : vocab) {
        const auto s = porter_stem(w);
        CHECK(porter_stem(s) == s);
    }
}

TEST_CASE("tokenize lowers, splits, strips punctuation") {
    CHECK(tokenize("A man is riding a motorcycle.") ==
          std::vector<std::string>{"a", "man", "is", "riding", "a", "motorcycle"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("Don't  stop") == std::vector<std::string>{"don't", "stop"});
    CHECK(tokenize("  \t\n ") == std::vector<std::string>{});
    CHECK(tokenize("\"hello,\" (world)!") == std::vector<std::string>{"hello", "world"});
}

TEST_CASE("build_lexica applies the positional rules") {
    const auto lex = build_lexica({"a man is riding a motorcycle"});
    CHECK(lex.objects.count("man"));
    CHECK(lex.objects.count("motorcycl"));
    CHECK(lex.actions.count("ride"));
    CHECK_FALSE(lex.actions.count("is"));
}

TEST_CASE("build_lexica excludes stop verbs from actions") {
    const auto lex = build_lexica({"a man is riding"});
    CHECK(lex.actions == std::set<std::string>{"ride"});
    for (const auto& sv : lex.stop_verbs) CHECK_FALSE(lex.actions.count(sv));
}

TEST_CASE("build_lexica merges seed lists") {
    const auto lex = build_lexica({"a man is riding"}, {"horse"}, {"eating"});
    CHECK(lex.objects.count("hors"));
    CHECK(lex.actions.count("eat"));
}

TEST_CASE("build_lexica rejects an empty corpus") {
    CHECK_THROWS_AS(build_lexica({}), std::invalid_argument);
}

TEST_CASE("extract_terms splits objects and actions by position") {
    const auto lex = build_lexica(
        {"a man is riding a motorcycle", "a man is playing with a toy", "a horse is eating"});
    const auto t1 = extract_terms("a man is riding a motorcycle", lex);
    CHECK(t1.objects == std::vector<std::string>{"man", "motorcycl"});
    CHECK(t1.actions == std::vector<std::string>{"ride"});

    const auto t2 = extract_terms("a man is playing with a toy", lex);
    CHECK(t2.objects == std::vector<std::string>{"man", "toi"});
    CHECK(t2.actions == std::vector<std::string>{"plai"});

    const auto t3 = extract_terms("hello world", Lexica{{}, {}, Lexica::default_stop_verbs()});
    CHECK(t3.objects.empty());
    CHECK(t3.actions.empty());
}

TEST_CASE("extract_terms output stems are members of the lexica") {
    const auto lex = build_lexica(
        {"a man is riding a motorcycle", "a woman is eating a potato", "a dog is running"});
    for (const auto* cap :
         {"a man is eating a potato", "a dog is riding a motorcycle", "a woman is running"}) {
        const auto t = extract_terms(cap, lex);
        for (const auto& o : t.objects) CHECK(lex.objects.count(o));
        for (const auto& a : t.actions) CHECK(lex.actions.count(a));
    }
}

TEST_CASE("build_reference_sets computes unions and mean length") {
    const auto lex = build_lexica({"a man is riding a motorcycle", "a woman is eating"});
    std::map<std::string, std::vector<std::string>> refs = {
        {"v1", {"a man is riding a motorcycle"}},
        {"v2", {"a man is riding a motorcycle", "a woman is eating a motorcycle"}},
    };
    const auto sets = build_reference_sets(refs, lex);
    CHECK(sets.at("v1").object_stems == std::set<std::string>{"man", "motorcycl"});
    CHECK(sets.at("v1").action_stems == std::set<std::string>{"ride"});
    CHECK(sets.at("v1").mean_len == doctest::Approx(6.0));
    // union over both references
    CHECK(sets.at("v2").object_stems == std::set<std::string>{"man", "motorcycl", "woman"});
    CHECK(sets.at("v2").action_stems == std::set<std::string>{"ride", "eat"});
    CHECK(sets.at("v2").mean_len == doctest::Approx(6.0));
}

TEST_CASE("build_reference_sets mean length averages different lengths") {
    const auto lex = build_lexica({"a man is riding"});
    std::map<std::string, std::vector<std::string>> refs = {
        {"v", {"a b c d e f", "a b c d e f g h"}}};
    const auto sets = build_reference_sets(refs, lex);
    CHECK(sets.at("v").mean_len == doctest::Approx(7.0));
}

TEST_CASE("build_reference_sets rejects a video with no references") {
    const auto lex = build_lexica({"a man is riding"});
    std::map<std::string, std::vector<std::string>> refs = {{"v", {}}};
    CHECK_THROWS_AS(build_reference_sets(refs, lex), std::invalid_argument);
}

TEST_CASE("build_reference_sets is permutation-invariant") {
    const auto lex = build_lexica(
        {"a man is riding a motorcycle", "a woman is eating a potato", "a dog is running"});
    std::map<std::string, std::vector<std::string>> fwd = {
        {"v", {"a man is riding a motorcycle", "a woman is eating a potato", "a dog is running"}}};
    std::map<std::string, std::vector<std::string>> rev = {
        {"v", {"a dog is running", "a woman is eating a potato", "a man is riding a motorcycle"}}};
    const auto a = build_reference_sets(fwd, lex).at("v");
    const auto b = build_reference_sets(rev, lex).at("v");
    CHECK(a.object_stems == b.object_stems);
    CHECK(a.action_stems == b.action_stems);
    CHECK(a.mean_len == doctest::Approx(b.mean_len));
}

TEST_CASE("lexica save/load round-trip") {
    const auto lex = build_lexica({"a man is riding a motorcycle"});
    lex.save("lexica_obj_test.txt", "lexica_act_test.txt");
    const auto loaded = Lexica::load("lexica_obj_test.txt", "lexica_act_test.txt");
    CHECK(loaded.objects == lex.objects);
    CHECK(loaded.actions == lex.actions);
    std::remove("lexica_obj_test.txt");
    std::remove("lexica_act_test.txt");
}

}  // TEST_SUITE

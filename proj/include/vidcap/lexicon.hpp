// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace vidcap {

// Porter's stemming algorithm (the original 1980 rule set). Total function:
// tokens that are not lowercase ASCII-alphabetic, or shorter than three
// letters, pass through unchanged.
std::string porter_stem(const std::string& word);

// Lowercase, split on whitespace, strip leading/trailing punctuation from
// each token, drop empties. Internal punctuation (apostrophes) is kept.
std::vector<std::string> tokenize(const std::string& caption);

// Term-category knowledge used both for auxiliary-head supervision and for
// hallucination scoring. Object/action membership is over Porter stems.
struct Lexica {
    std::set<std::string> objects;
    std::set<std::string> actions;
    std::set<std::string> stop_verbs;  // stems of auxiliaries, never actions

    static std::set<std::string> default_stop_verbs();

    void save(const std::string& objects_path, const std::string& actions_path) const;
    static Lexica load(const std::string& objects_path, const std::string& actions_path);
};

// Ordered multisets of stems extracted from one caption. Duplicates are
// preserved here; set construction dedupes downstream.
struct TermLists {
    std::vector<std::string> objects;
    std::vector<std::string> actions;
};

// Per-video ground truth: object/action stem sets and mean reference length.
struct ReferenceSet {
    std::string video_id;
    std::set<std::string> object_stems;  // N_O
    std::set<std::string> action_stems;  // N_A
    double mean_len = 0.0;               // T, in tokens
};

// Builds the object/action vocabularies from reference captions with the
// positional rules of the template grammar: a token after an article is an
// object candidate, a token after a stop verb (or carrying an -ing/-ed/-s
// suffix in that position) is an action candidate. Seed terms are stemmed and
// merged by union.
Lexica build_lexica(const std::vector<std::string>& captions,
                    const std::set<std::string>& object_seeds = {},
                    const std::set<std::string>& action_seeds = {});

// Stems every token; emits a stem as action if it sits in verb position
// (right after a stop verb, or ends in -ing) and is in lexica.actions,
// otherwise as object if it is in lexica.objects.
TermLists extract_terms(const std::string& caption, const Lexica& lexica);

// N_O / N_A = union of extracted terms over the video's references; T =
// arithmetic mean token count. Throws if a video has no references.
std::map<std::string, ReferenceSet> build_reference_sets(
    const std::map<std::string, std::vector<std::string>>& refs_by_video, const Lexica& lexica);

}  // namespace vidcap

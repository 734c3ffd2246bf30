// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "vidcap/embedding.hpp"
#include "vidcap/lexicon.hpp"

namespace vidcap {

// COAHA = OH + AH. OH sums, over hallucinated object stems (candidate terms
// outside the video's ground-truth set), the mean embedding distance to the
// ground-truth objects, normalized by the mean reference length; AH is the
// action analogue. Reported values carry a fixed x100 scale so corpus numbers
// land in a readable range; the raw values are emitted alongside.
inline constexpr double kCoahaReportScale = 100.0;

// Distance used when a term is out of vocabulary or the reference term set is
// empty: the neutral midpoint of [0, 2].
inline constexpr double kNeutralDistance = 1.0;

struct InstanceReport {
    std::string video_id;
    std::set<std::string> hallucinated_objects;  // H_O
    std::set<std::string> hallucinated_actions;  // H_A
    double oh = 0.0;                             // scaled
    double ah = 0.0;
    double coaha = 0.0;
    double raw_oh = 0.0;  // before the report scale
    double raw_ah = 0.0;
    double raw_coaha = 0.0;
    std::set<std::string> oov_terms;  // scored by the neutral fallback
};

struct CorpusReport {
    double mean_oh = 0.0;
    double mean_ah = 0.0;
    double mean_coaha = 0.0;
    std::vector<InstanceReport> per_instance;
};

// Exact stem-set differences; synonymy shows up in distance magnitude, not in
// membership.
std::pair<std::set<std::string>, std::set<std::string>> hallucinated_sets(
    const std::set<std::string>& candidate_objects, const std::set<std::string>& candidate_actions,
    const ReferenceSet& ref);

// Mean of distance(term, w) over w in ref_terms; neutral fallback when the
// term is OOV or ref_terms is empty. `oov` is set when the fallback fired.
double mean_semantic_distance(const std::string& term, const std::set<std::string>& ref_terms,
                              const EmbeddingTable& table, bool* oov = nullptr);

InstanceReport score_instance(const std::string& candidate, const ReferenceSet& ref,
                              const Lexica& lexica, const EmbeddingTable& table);

// Per-instance reports plus arithmetic means. Instances are scored in
// parallel; aggregation order is the candidates' map order.
CorpusReport score_corpus(const std::map<std::string, std::string>& candidates,
                          const std::map<std::string, ReferenceSet>& refs, const Lexica& lexica,
                          const EmbeddingTable& table);

}  // namespace vidcap

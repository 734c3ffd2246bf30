// SPDX-License-Identifier: Apache-2.0
#include "vidcap/coaha.hpp"

#include <exception>
#include <stdexcept>

#include "vidcap/parallel.hpp"

namespace vidcap {

std::pair<std::set<std::string>, std::set<std::string>> hallucinated_sets(
    const std::set<std::string>& candidate_objects, const std::set<std::string>& candidate_actions,
    const ReferenceSet& ref) {
    std::set<std::string> h_o, h_a;
    for (const auto& s : candidate_objects) {
        if (!ref.object_stems.count(s)) h_o.insert(s);
    }
    for (const auto& s : candidate_actions) {
        if (!ref.action_stems.count(s)) h_a.insert(s);
    }
    return {std::move(h_o), std::move(h_a)};
}

double mean_semantic_distance(const std::string& term, const std::set<std::string>& ref_terms,
                              const EmbeddingTable& table, bool* oov) {
    if (oov) *oov = false;
    const std::vector<double>* tv = table.find_with_stem_fallback(term);
    if (!tv || ref_terms.empty()) {
        if (oov) *oov = true;
        return kNeutralDistance;
    }
    double sum = 0.0;
    std::size_t counted = 0;
    bool any_missing = false;
    for (const auto& w : ref_terms) {
        const std::vector<double>* wv = table.find_with_stem_fallback(w);
        if (!wv) {
            // A reference term outside the table contributes the neutral
            // distance rather than silently shrinking the mean.
            sum += kNeutralDistance;
            any_missing = true;
        } else {
            sum += 1.0 - cosine(*tv, *wv);
        }
        ++counted;
    }
    if (any_missing && oov) *oov = true;
    return sum / static_cast<double>(counted);
}

InstanceReport score_instance(const std::string& candidate, const ReferenceSet& ref,
                              const Lexica& lexica, const EmbeddingTable& table) {
    if (ref.mean_len <= 0.0) {
        throw std::invalid_argument("coaha: reference set for '" + ref.video_id +
                                    "' has non-positive mean length");
    }
    InstanceReport rep;
    rep.video_id = ref.video_id;

    const TermLists terms = extract_terms(candidate, lexica);
    const std::set<std::string> cand_objects(terms.objects.begin(), terms.objects.end());
    const std::set<std::string> cand_actions(terms.actions.begin(), terms.actions.end());
    auto [h_o, h_a] = hallucinated_sets(cand_objects, cand_actions, ref);
    rep.hallucinated_objects = std::move(h_o);
    rep.hallucinated_actions = std::move(h_a);

    double oh_sum = 0.0;
    for (const auto& h : rep.hallucinated_objects) {
        bool oov = false;
        oh_sum += mean_semantic_distance(h, ref.object_stems, table, &oov);
        if (oov) rep.oov_terms.insert(h);
    }
    double ah_sum = 0.0;
    for (const auto& a : rep.hallucinated_actions) {
        bool oov = false;
        ah_sum += mean_semantic_distance(a, ref.action_stems, table, &oov);
        if (oov) rep.oov_terms.insert(a);
    }

    rep.raw_oh = oh_sum / ref.mean_len;
    rep.raw_ah = ah_sum / ref.mean_len;
    rep.raw_coaha = rep.raw_oh + rep.raw_ah;
    rep.oh = kCoahaReportScale * rep.raw_oh;
    rep.ah = kCoahaReportScale * rep.raw_ah;
    rep.coaha = rep.oh + rep.ah;
    return rep;
}

CorpusReport score_corpus(const std::map<std::string, std::string>& candidates,
                          const std::map<std::string, ReferenceSet>& refs, const Lexica& lexica,
                          const EmbeddingTable& table) {
    if (candidates.empty()) throw std::invalid_argument("coaha: empty candidate map");
    std::vector<std::pair<const std::string*, const std::string*>> items;
    items.reserve(candidates.size());
    for (const auto& [vid, caption] : candidates) {
        if (!refs.count(vid)) {
            throw std::invalid_argument("coaha: no reference set for video '" + vid + "'");
        }
        items.emplace_back(&vid, &caption);
    }

    CorpusReport corpus;
    corpus.per_instance.resize(items.size());
    std::vector<std::exception_ptr> errors(items.size());
    parallel_for(items.size(), [&](std::size_t i) {
        try {
            corpus.per_instance[i] =
                score_instance(*items[i].second, refs.at(*items[i].first), lexica, table);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }

    for (const auto& rep : corpus.per_instance) {
        corpus.mean_oh += rep.oh;
        corpus.mean_ah += rep.ah;
        corpus.mean_coaha += rep.coaha;
    }
    const double n = static_cast<double>(corpus.per_instance.size());
    corpus.mean_oh /= n;
    corpus.mean_ah /= n;
    corpus.mean_coaha /= n;
    return corpus;
}

}  // namespace vidcap

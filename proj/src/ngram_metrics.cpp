// SPDX-License-Identifier: Apache-2.0
#include "vidcap/ngram_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include "vidcap/lexicon.hpp"
#include "vidcap/parallel.hpp"

namespace vidcap {

namespace {

constexpr int kMaxN = 4;
constexpr double kCiderSigma = 6.0;
constexpr double kCiderScale = 10.0;

void check_corpus(const std::map<std::string, std::string>& hypotheses,
                  const std::map<std::string, std::vector<std::string>>& references) {
    if (hypotheses.empty()) throw std::invalid_argument("metrics: empty hypothesis corpus");
    for (const auto& [vid, hyp] : hypotheses) {
        (void)hyp;
        auto it = references.find(vid);
        if (it == references.end() || it->second.empty()) {
            throw std::invalid_argument("metrics: no references for video '" + vid + "'");
        }
    }
}

}  // namespace

NGramStats ngram_stats(const std::vector<std::string>& tokens, int max_n) {
    NGramStats stats;
    stats.length = static_cast<int>(tokens.size());
    for (int n = 1; n <= max_n; ++n) {
        for (int i = 0; i + n <= stats.length; ++i) {
            std::vector<std::string> gram(tokens.begin() + i, tokens.begin() + i + n);
            ++stats.counts[std::move(gram)];
        }
    }
    return stats;
}

double bleu4(const std::map<std::string, std::string>& hypotheses,
             const std::map<std::string, std::vector<std::string>>& references) {
    check_corpus(hypotheses, references);

    long long clipped[kMaxN + 1] = {0};
    long long total[kMaxN + 1] = {0};
    long long hyp_len_sum = 0;
    long long ref_len_sum = 0;

    for (const auto& [vid, hyp] : hypotheses) {
        const auto hyp_tokens = tokenize(hyp);
        const NGramStats hyp_stats = ngram_stats(hyp_tokens);

        // Max reference count per n-gram, and the closest reference length.
        std::map<std::vector<std::string>, int> max_ref_counts;
        int closest_len = -1;
        for (const auto& ref : references.at(vid)) {
            const auto ref_tokens = tokenize(ref);
            const NGramStats ref_stats = ngram_stats(ref_tokens);
            for (const auto& [gram, count] : ref_stats.counts) {
                auto [it, inserted] = max_ref_counts.emplace(gram, count);
                if (!inserted) it->second = std::max(it->second, count);
            }
            const int len = ref_stats.length;
            if (closest_len < 0 ||
                std::abs(len - hyp_stats.length) < std::abs(closest_len - hyp_stats.length) ||
                (std::abs(len - hyp_stats.length) == std::abs(closest_len - hyp_stats.length) &&
                 len < closest_len)) {
                closest_len = len;
            }
        }

        for (const auto& [gram, count] : hyp_stats.counts) {
            const int n = static_cast<int>(gram.size());
            total[n] += count;
            auto it = max_ref_counts.find(gram);
            if (it != max_ref_counts.end()) clipped[n] += std::min(count, it->second);
        }
        hyp_len_sum += hyp_stats.length;
        ref_len_sum += closest_len;
    }

    double log_precision_sum = 0.0;
    for (int n = 1; n <= kMaxN; ++n) {
        if (total[n] == 0 || clipped[n] == 0) return 0.0;
        log_precision_sum +=
            0.25 * std::log(static_cast<double>(clipped[n]) / static_cast<double>(total[n]));
    }
    double bp = 1.0;
    if (hyp_len_sum <= ref_len_sum) {
        if (hyp_len_sum == 0) return 0.0;
        bp = std::exp(1.0 - static_cast<double>(ref_len_sum) / static_cast<double>(hyp_len_sum));
    }
    return bp * std::exp(log_precision_sum);
}

namespace {

// tf-idf vector per n, plus L2 norms and token length.
struct CiderVec {
    std::map<std::vector<std::string>, double> vec[kMaxN];
    double norm[kMaxN] = {0.0, 0.0, 0.0, 0.0};
    int length = 0;
};

CiderVec cider_vec(const std::vector<std::string>& tokens,
                   const std::map<std::vector<std::string>, int>& doc_freq, double log_num_videos) {
    CiderVec cv;
    cv.length = static_cast<int>(tokens.size());
    const NGramStats stats = ngram_stats(tokens);
    for (const auto& [gram, count] : stats.counts) {
        auto it = doc_freq.find(gram);
        const double df = it == doc_freq.end() ? 1.0 : std::max(1.0, static_cast<double>(it->second));
        const double idf = log_num_videos - std::log(df);
        const int n = static_cast<int>(gram.size()) - 1;
        const double w = static_cast<double>(count) * idf;
        cv.vec[n][gram] = w;
        cv.norm[n] += w * w;
    }
    for (int n = 0; n < kMaxN; ++n) cv.norm[n] = std::sqrt(cv.norm[n]);
    return cv;
}

double cider_sim(const CiderVec& hyp, const CiderVec& ref) {
    const double delta = static_cast<double>(hyp.length - ref.length);
    const double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
    double sum = 0.0;
    for (int n = 0; n < kMaxN; ++n) {
        double val = 0.0;
        for (const auto& [gram, w] : hyp.vec[n]) {
            auto it = ref.vec[n].find(gram);
            if (it != ref.vec[n].end()) val += std::min(w, it->second) * it->second;
        }
        if (hyp.norm[n] != 0.0 && ref.norm[n] != 0.0) val /= hyp.norm[n] * ref.norm[n];
        sum += val * penalty;
    }
    return sum;
}

}  // namespace

double cider_d(const std::map<std::string, std::string>& hypotheses,
               const std::map<std::string, std::vector<std::string>>& references) {
    check_corpus(hypotheses, references);
    // A single-video corpus degenerates to 0: every idf is log(1/1) = 0.

    // df(g) = number of videos whose reference set contains g.
    std::map<std::vector<std::string>, int> doc_freq;
    for (const auto& [vid, hyp] : hypotheses) {
        (void)hyp;
        std::set<std::vector<std::string>> seen;
        for (const auto& ref : references.at(vid)) {
            const NGramStats stats = ngram_stats(tokenize(ref));
            for (const auto& [gram, count] : stats.counts) {
                (void)count;
                seen.insert(gram);
            }
        }
        for (const auto& gram : seen) ++doc_freq[gram];
    }
    const double log_num_videos = std::log(static_cast<double>(hypotheses.size()));

    std::vector<const std::string*> vids;
    vids.reserve(hypotheses.size());
    for (const auto& [vid, hyp] : hypotheses) {
        (void)hyp;
        vids.push_back(&vid);
    }

    std::vector<double> scores(vids.size(), 0.0);
    parallel_for(vids.size(), [&](std::size_t i) {
        const std::string& vid = *vids[i];
        const CiderVec hyp_vec = cider_vec(tokenize(hypotheses.at(vid)), doc_freq, log_num_videos);
        const auto& refs = references.at(vid);
        double acc = 0.0;
        for (const auto& ref : refs) {
            acc += cider_sim(hyp_vec, cider_vec(tokenize(ref), doc_freq, log_num_videos));
        }
        // Mean over references and over the four n-gram orders, x10.
        scores[i] = kCiderScale * acc / (static_cast<double>(refs.size()) * kMaxN);
    });

    double total = 0.0;
    for (double s : scores) total += s;
    return total / static_cast<double>(scores.size());
}

}  // namespace vidcap

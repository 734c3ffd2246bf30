// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

namespace vidcap {

// N-gram counts (n = 1..4) plus token length for one sentence.
struct NGramStats {
    std::map<std::vector<std::string>, int> counts;
    int length = 0;
};

NGramStats ngram_stats(const std::vector<std::string>& tokens, int max_n = 4);

// Corpus BLEU-4: uniform weights over n = 1..4, clipped counts pooled at the
// corpus level, brevity penalty against the closest reference length (ties
// toward the shorter reference). Unsmoothed: any zero precision gives 0.
double bleu4(const std::map<std::string, std::string>& hypotheses,
             const std::map<std::string, std::vector<std::string>>& references);

// CIDEr-D, canonical variant: tf-idf n-gram cosine for n = 1..4 with hyp-side
// clipping, Gaussian length penalty (sigma = 6), x10 scale, mean over
// references then over videos. Document frequencies come from the reference
// corpus, so at least two videos are required.
double cider_d(const std::map<std::string, std::string>& hypotheses,
               const std::map<std::string, std::vector<std::string>>& references);

}  // namespace vidcap

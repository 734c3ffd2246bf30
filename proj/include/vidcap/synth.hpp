// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "vidcap/config.hpp"

namespace vidcap {

// Synthetic desk-scale corpus: per-video Gaussian feature prototypes with a
// known (object, action) concept pair, template captions whose stems recover
// the concepts exactly, a matching mini embedding table with designated
// synonym-pair structure, and a 70/15/15 split manifest.
struct SynthConfig {
    int num_videos = 200;
    int n_frames = 8;
    int k_objects = 12;
    int k_actions = 8;
    int d_a = 24;
    int d_m = 24;
    int d_o = 24;
    int emb_dim = 16;
    double noise_sigma = 0.3;
    int refs_per_video = 2;
    unsigned long long seed = 7;
    int category_count = 0;  // 0 disables the category head downstream

    static SynthConfig from_config(const KeyValueConfig& cfg);
    void validate() const;
};

// Writes features/, captions.jsonl, embeddings.vec, objects.txt, actions.txt,
// manifest.json and (when category_count > 0) categories.jsonl under out_dir.
// Deterministic for a fixed config: byte-identical across runs.
void generate_corpus(const SynthConfig& config, const std::string& out_dir);

}  // namespace vidcap

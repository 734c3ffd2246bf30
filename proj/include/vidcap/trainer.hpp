// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vidcap/config.hpp"
#include "vidcap/corpus.hpp"
#include "vidcap/model.hpp"
#include "vidcap/vocab.hpp"

namespace vidcap {

struct TrainConfig {
    double learning_rate = 1e-4;
    double clip_norm = 5.0;
    int batch_size = 8;
    int epochs = 60;
    unsigned long long seed = 1;
    LambdaWeights lambdas;
    std::string strategy = "teacher_forcing";  // or "scheduled_sampling"
    double ss_floor = 0.75;
    int d = 32, e = 32, m = 32;
    std::optional<int> n_frames;  // validated against the corpus when set
    int vocab_min_count = 5;
    int max_len = 30;
    bool use_aux_heads = true;
    bool use_context_gates = true;
    bool use_category_head = true;  // effective only when the corpus has categories
    int val_every = 1;

    static TrainConfig from_config(const KeyValueConfig& cfg);
    void validate() const;
};

// Per-parameter first/second moment buffers plus the shared step count.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    long step = 0;
};

// Canonical Adam with bias correction. Throws on non-finite gradients.
void adam_step(const std::vector<ad::Tensor*>& params, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Scales all gradients by max_norm / ||g|| when the global L2 norm exceeds
// max_norm. Returns the post-clip norm.
double clip_gradients(const std::vector<ad::Tensor*>& params, double max_norm);

// Linear decay of the teacher-forcing probability from 1.0 at epoch 0 to
// `floor` at the final epoch.
double scheduled_sampling_prob(int epoch, int total_epochs, double floor);

struct EpochLog {
    int epoch = 0;
    double l_ce = 0.0;  // per-sample means
    double l_ah = 0.0;
    double l_cl = 0.0;
    double coaha = std::numeric_limits<double>::quiet_NaN();
    double bleu4 = std::numeric_limits<double>::quiet_NaN();
    double max_post_clip_norm = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> log;
    bool aborted_non_finite = false;
};

// Runs the optimization loop and writes <out_checkpoint> (named tensors,
// Adam moments under opt.*), <out_checkpoint>.json (hyperparameters, vocab,
// RNG state, epoch cursor) and, when log_csv is non-empty, a per-epoch CSV
// "epoch,l_ce,l_ah,l_cl,coaha,bleu4". Deterministic for a fixed seed.
TrainResult train(const TrainConfig& config, const Corpus& corpus,
                  const std::string& out_checkpoint, const std::string& log_csv = "",
                  const std::string& resume_from = "");

// Model + vocabulary restored from a checkpoint pair.
struct SavedModel {
    std::unique_ptr<CaptionModel> model;
    Vocabulary vocab;
    TrainConfig train_config;

    static SavedModel load(const std::string& checkpoint_path);
};

// Greedy-decodes every id of the split in parallel with the read-only model.
std::map<std::string, DecodeResult> decode_split(const CaptionModel& model, const Corpus& corpus,
                                                 const std::vector<std::string>& ids);

}  // namespace vidcap

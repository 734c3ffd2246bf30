// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vidcap/corpus.hpp"
#include "vidcap/tensor.hpp"

namespace vidcap {

// Captioner wiring: per-stream adapters, auxiliary heads whose hidden
// activations are the refined features, one attention shared across streams,
// encoder/decoder context gates conditioned on running visual and language
// memories, an LSTM decoder, and the combined loss (cross-entropy +
// multi-label auxiliary heads + coherent L1).
struct ModelConfig {
    int d = 32;  // adapter/refined/hidden size
    int e = 32;  // token embedding size
    int m = 32;  // running memory size
    int d_a = 0, d_m = 0, d_o = 0;
    int vocab_size = 0;
    int n_objects = 0;
    int n_actions = 0;
    int category_count = 0;  // 0: no category label branch
    bool use_aux_heads = true;
    bool use_context_gates = true;
    int max_len = 30;

    void validate() const;
};

struct LambdaWeights {
    double acl = 0.01;  // attention coherence
    double fcl = 0.1;   // appearance coherence
    double mcl = 0.01;  // motion coherence
    double ocl = 0.1;   // object coherence
    double cat = 0.5;   // category head
    double act = 0.5;   // action head
    double obj = 0.5;   // object head
};

struct MultiLabelTargets {
    std::vector<double> objects;  // size n_objects, binary
    std::vector<double> actions;  // size n_actions, binary
    std::optional<std::vector<double>> category;
};

struct TrainingSample {
    const VideoFeatures* features = nullptr;
    std::vector<int> target_tokens;  // caption, EOS-terminated
    MultiLabelTargets labels;
};

struct LossParts {
    double total = 0.0;
    double ce = 0.0;
    double ah = 0.0;
    double cl = 0.0;
};

struct DecodeStepInfo {
    int token = 0;
    double confidence = 0.0;  // probability of the emitted token
    double source_gate_mean = 1.0;
    double target_gate_mean = 1.0;
    std::vector<double> alpha;
};

struct DecodeResult {
    std::vector<DecodeStepInfo> steps;  // every emitted step, EOS included
    std::vector<int> caption_ids;       // specials stripped
    std::string caption;
};

// Recorded intermediate values of one teacher-forced rollout, for tests and
// invariant checks. Vectors are row-major copies of the graph values.
struct StepTraceEntry {
    std::vector<double> alpha;
    std::vector<double> enc_gates;  // 3d, empty when gates are off
    std::vector<double> dec_gates;  // 3d+e, empty when gates are off
    std::vector<double> attended_app, attended_mot, attended_obj;
    std::vector<double> v_mt;
    std::vector<double> c_t;
    std::vector<double> h;
    std::vector<double> logits;
    std::vector<double> probs;
};

struct ForwardTrace {
    std::vector<double> app_refined, mot_refined, obj_refined;  // [N x d]
    std::vector<double> obj_probs, act_probs, cat_probs;
    std::vector<StepTraceEntry> steps;
};

class CaptionModel {
  public:
    explicit CaptionModel(ModelConfig cfg);

    const ModelConfig& config() const { return cfg_; }

    // Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] weights, zero biases, in
    // registration order. Deterministic for a fixed seed.
    void init_params(std::mt19937_64& rng);

    const std::vector<std::pair<std::string, ad::Tensor*>>& named_params() const {
        return named_;
    }
    std::vector<ad::Tensor*> params() const;
    ad::Tensor* param(const std::string& name) const;

    void zero_grads();

    // Builds the full per-sample loss graph. With ss_rng set, each step flips
    // a coin: with probability teacher_prob the decoder input is the teacher
    // token, otherwise the model's previous argmax (scheduled sampling). The
    // running memories always consume the teacher token during training.
    ad::Tensor* build_loss(ad::Graph& g, const TrainingSample& sample, const LambdaWeights& lw,
                           LossParts* parts = nullptr, std::mt19937_64* ss_rng = nullptr,
                           double teacher_prob = 1.0) const;

    // Greedy argmax decoding, ties to the lowest index; stops at EOS or
    // max_len. No gradient state is touched.
    DecodeResult greedy_decode(const VideoFeatures& vf) const;

    // Teacher-forced no-grad rollout with every intermediate recorded.
    ForwardTrace trace(const VideoFeatures& vf, const std::vector<int>& teacher_tokens) const;

    void load_state(const std::map<std::string, ad::Tensor>& tensors);

  private:
    struct Rollout;

    ad::Tensor* add_param(const std::string& name, std::vector<int> shape);

    ModelConfig cfg_;
    std::vector<std::unique_ptr<ad::Tensor>> storage_;
    std::vector<std::pair<std::string, ad::Tensor*>> named_;
    std::map<std::string, ad::Tensor*> by_name_;
};

// Multi-label supervision extracted from one caption against the lexica
// label spaces (sorted stem order).
MultiLabelTargets make_label_targets(const std::string& caption, const Lexica& lexica,
                                     std::optional<int> category, int category_count);

}  // namespace vidcap

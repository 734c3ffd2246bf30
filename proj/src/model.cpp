// SPDX-License-Identifier: Apache-2.0
#include "vidcap/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vidcap/vocab.hpp"

namespace vidcap {

using ad::Graph;
using ad::Tensor;

void ModelConfig::validate() const {
    if (d < 1 || e < 1 || m < 1) throw std::invalid_argument("model: dims must be positive");
    if (d_a < 1 || d_m < 1 || d_o < 1) {
        throw std::invalid_argument("model: feature dims must be positive");
    }
    if (vocab_size <= Vocabulary::kUnk) {
        throw std::invalid_argument("model: vocabulary too small");
    }
    if (use_aux_heads && (n_objects < 1 || n_actions < 1)) {
        throw std::invalid_argument("model: auxiliary heads need non-empty label spaces");
    }
    if (category_count < 0) throw std::invalid_argument("model: bad category_count");
    if (max_len < 1) throw std::invalid_argument("model: max_len must be positive");
}

CaptionModel::CaptionModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const int d = cfg_.d, e = cfg_.e, m = cfg_.m;

    add_param("adapter.app.w", {cfg_.d_a, d});
    add_param("adapter.app.b", {d});
    add_param("adapter.mot.w", {cfg_.d_m, d});
    add_param("adapter.mot.b", {d});
    add_param("adapter.obj.w", {cfg_.d_o, d});
    add_param("adapter.obj.b", {d});

    if (cfg_.use_aux_heads) {
        add_param("aux.app.w1", {d, d});
        add_param("aux.app.b1", {d});
        add_param("aux.mot.w1", {d, d});
        add_param("aux.mot.b1", {d});
        add_param("aux.obj.w1", {d, d});
        add_param("aux.obj.b1", {d});
        add_param("aux.obj.w2", {cfg_.n_objects, d});
        add_param("aux.obj.b2", {cfg_.n_objects});
        add_param("aux.act.w2", {cfg_.n_actions, d});
        add_param("aux.act.b2", {cfg_.n_actions});
        if (cfg_.category_count > 0) {
            add_param("aux.cat.w2", {cfg_.category_count, d});
            add_param("aux.cat.b2", {cfg_.category_count});
        }
    }

    add_param("att.w", {d, d});
    add_param("att.u", {3 * d, d});
    add_param("att.b", {d});
    add_param("att.v", {d});

    if (cfg_.use_context_gates) {
        add_param("gate.enc.w1", {d, 3 * d + 2 * m});
        add_param("gate.enc.b1", {d});
        add_param("gate.enc.w2", {3 * d, d});
        add_param("gate.enc.b2", {3 * d});
        add_param("gate.dec.w1", {d, 3 * d + e + 2 * m});
        add_param("gate.dec.b1", {d});
        add_param("gate.dec.w2", {3 * d + e, d});
        add_param("gate.dec.b2", {3 * d + e});
    }

    add_param("embed.tok", {cfg_.vocab_size, e});
    add_param("lstm.w_ih", {4 * d, 3 * d + e});
    add_param("lstm.w_hh", {4 * d, d});
    add_param("lstm.b", {4 * d});
    add_param("out.w", {cfg_.vocab_size, d});
    add_param("out.b", {cfg_.vocab_size});

    if (cfg_.use_context_gates) {
        add_param("mem.vis.wz", {m, 3 * d});
        add_param("mem.vis.uz", {m, m});
        add_param("mem.vis.bz", {m});
        add_param("mem.vis.wc", {m, 3 * d});
        add_param("mem.vis.uc", {m, m});
        add_param("mem.vis.bc", {m});
        add_param("mem.lang.wz", {m, e});
        add_param("mem.lang.uz", {m, m});
        add_param("mem.lang.bz", {m});
        add_param("mem.lang.wc", {m, e});
        add_param("mem.lang.uc", {m, m});
        add_param("mem.lang.bc", {m});
    }
}

Tensor* CaptionModel::add_param(const std::string& name, std::vector<int> shape) {
    storage_.push_back(std::make_unique<Tensor>(std::move(shape), true));
    Tensor* t = storage_.back().get();
    t->name = name;
    named_.emplace_back(name, t);
    by_name_[name] = t;
    return t;
}

void CaptionModel::init_params(std::mt19937_64& rng) {
    for (auto& [name, t] : named_) {
        const bool is_bias = t->shape.size() == 1 && name != "att.v";
        if (is_bias) {
            t->fill(0.0);
            continue;
        }
        const int fan_in = t->shape.size() == 2 ? t->shape[1] : t->shape[0];
        const double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-r, r);
        for (auto& v : t->val) v = dist(rng);
    }
}

std::vector<Tensor*> CaptionModel::params() const {
    std::vector<Tensor*> out;
    out.reserve(named_.size());
    for (const auto& [name, t] : named_) {
        (void)name;
        out.push_back(t);
    }
    return out;
}

Tensor* CaptionModel::param(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) {
        throw std::invalid_argument("model: no parameter named '" + name + "'");
    }
    return it->second;
}

void CaptionModel::zero_grads() {
    for (const auto& [name, t] : named_) {
        (void)name;
        t->zero_grad();
    }
}

void CaptionModel::load_state(const std::map<std::string, ad::Tensor>& tensors) {
    for (auto& [name, t] : named_) {
        auto it = tensors.find(name);
        if (it == tensors.end()) {
            throw std::invalid_argument("model: checkpoint lacks tensor '" + name + "'");
        }
        if (it->second.shape != t->shape) {
            throw std::invalid_argument("model: checkpoint shape mismatch for '" + name + "'");
        }
        t->val = it->second.val;
    }
}

// Shared forward machinery for one sample: constant per-video pieces are
// built once, then step() advances one decoded token.
struct CaptionModel::Rollout {
    const CaptionModel& model;
    Graph& g;
    const ModelConfig& cfg;

    Tensor *a_ref = nullptr, *m_ref = nullptr, *o_ref = nullptr;  // [N x d]
    Tensor* att_proj = nullptr;                                   // [N x d]
    Tensor *obj_logits = nullptr, *act_logits = nullptr, *cat_logits = nullptr;

    Tensor *h = nullptr, *c = nullptr, *mv = nullptr, *ml = nullptr;
    Tensor* last_vmt = nullptr;
    std::vector<Tensor*> alphas;

    Rollout(const CaptionModel& mdl, Graph& graph, const VideoFeatures& vf)
        : model(mdl), g(graph), cfg(mdl.config()) {
        vf.validate();
        if (vf.d_a != cfg.d_a || vf.d_m != cfg.d_m || vf.d_o != cfg.d_o) {
            throw std::invalid_argument("model: feature dims of '" + vf.video_id +
                                        "' disagree with the model config");
        }
        auto P = [&](const char* n) { return model.param(n); };

        Tensor* app_in = g.leaf({vf.n, cfg.d_a}, vf.appearance);
        Tensor* mot_in = g.leaf({vf.n, cfg.d_m}, vf.motion);
        Tensor* obj_in = g.leaf({vf.n, cfg.d_o}, vf.object);

        Tensor* app_ad =
            g.tanh_(g.add_bias(g.matmul(app_in, P("adapter.app.w")), P("adapter.app.b")));
        Tensor* mot_ad =
            g.tanh_(g.add_bias(g.matmul(mot_in, P("adapter.mot.w")), P("adapter.mot.b")));
        Tensor* obj_ad =
            g.tanh_(g.add_bias(g.matmul(obj_in, P("adapter.obj.w")), P("adapter.obj.b")));

        if (cfg.use_aux_heads) {
            a_ref = g.tanh_(g.add_bias(g.matmul(app_ad, P("aux.app.w1")), P("aux.app.b1")));
            m_ref = g.tanh_(g.add_bias(g.matmul(mot_ad, P("aux.mot.w1")), P("aux.mot.b1")));
            o_ref = g.tanh_(g.add_bias(g.matmul(obj_ad, P("aux.obj.w1")), P("aux.obj.b1")));
            obj_logits =
                g.add(g.matmul(P("aux.obj.w2"), g.mean_rows(o_ref)), P("aux.obj.b2"));
            act_logits =
                g.add(g.matmul(P("aux.act.w2"), g.mean_rows(m_ref)), P("aux.act.b2"));
            if (cfg.category_count > 0) {
                cat_logits =
                    g.add(g.matmul(P("aux.cat.w2"), g.mean_rows(a_ref)), P("aux.cat.b2"));
            }
        } else {
            a_ref = app_ad;
            m_ref = mot_ad;
            o_ref = obj_ad;
        }

        att_proj = g.matmul(g.concat_cols({a_ref, m_ref, o_ref}), P("att.u"));

        h = g.leaf({cfg.d});
        c = g.leaf({cfg.d});
        if (cfg.use_context_gates) {
            mv = g.leaf({cfg.m});
            ml = g.leaf({cfg.m});
        }
    }

    struct StepOut {
        Tensor* logits = nullptr;
        Tensor* alpha = nullptr;
        Tensor* a_t = nullptr;
        Tensor* m_t = nullptr;
        Tensor* o_t = nullptr;
        Tensor* vmt = nullptr;
        Tensor* ct = nullptr;
        Tensor* enc_gates = nullptr;  // null when gates are off
        Tensor* dec_gates = nullptr;
        Tensor* h_out = nullptr;
        double source_gate_mean = 1.0;
        double target_gate_mean = 1.0;
    };

    static double mean_val(const Tensor* t) {
        double s = 0.0;
        for (double v : t->val) s += v;
        return s / static_cast<double>(t->val.size());
    }

    // One decode step conditioned on the previous token. Leaves the running
    // memories untouched; call advance() with the realized token afterwards,
    // so gates at step t see memories from step t-1.
    StepOut step(int prev_token) {
        auto P = [&](const char* n) { return model.param(n); };
        StepOut out;

        Tensor* q = g.add(g.matmul(P("att.w"), h), P("att.b"));
        Tensor* energies = g.matmul(g.tanh_(g.add_bias(att_proj, q)), P("att.v"));
        Tensor* alpha = g.softmax(energies);
        out.alpha = alpha;
        alphas.push_back(alpha);

        Tensor* a_t = g.matmul(alpha, a_ref);
        Tensor* m_t = g.matmul(alpha, m_ref);
        Tensor* o_t = g.matmul(alpha, o_ref);
        Tensor* emb_prev = g.lookup(P("embed.tok"), prev_token);
        out.a_t = a_t;
        out.m_t = m_t;
        out.o_t = o_t;

        Tensor* vmt = nullptr;
        Tensor* ct = nullptr;
        if (cfg.use_context_gates) {
            Tensor* ze = g.concat({a_t, m_t, o_t, mv, ml});
            Tensor* eh = g.tanh_(g.add(g.matmul(P("gate.enc.w1"), ze), P("gate.enc.b1")));
            Tensor* egates = g.sigmoid(g.add(g.matmul(P("gate.enc.w2"), eh), P("gate.enc.b2")));
            Tensor* cg_a = g.slice(egates, 0, cfg.d);
            Tensor* cg_m = g.slice(egates, cfg.d, cfg.d);
            Tensor* cg_o = g.slice(egates, 2 * cfg.d, cfg.d);
            vmt = g.concat(
                {g.hadamard(cg_a, a_t), g.hadamard(cg_m, m_t), g.hadamard(cg_o, o_t)});

            Tensor* zd = g.concat({vmt, emb_prev, mv, ml});
            Tensor* dh = g.tanh_(g.add(g.matmul(P("gate.dec.w1"), zd), P("gate.dec.b1")));
            Tensor* dgates = g.sigmoid(g.add(g.matmul(P("gate.dec.w2"), dh), P("gate.dec.b2")));
            Tensor* cg_s = g.slice(dgates, 0, 3 * cfg.d);
            Tensor* cg_t = g.slice(dgates, 3 * cfg.d, cfg.e);
            ct = g.concat({g.hadamard(cg_s, vmt), g.hadamard(cg_t, emb_prev)});
            out.source_gate_mean = mean_val(cg_s);
            out.target_gate_mean = mean_val(cg_t);
            out.enc_gates = egates;
            out.dec_gates = dgates;
        } else {
            vmt = g.concat({a_t, m_t, o_t});
            ct = g.concat({vmt, emb_prev});
        }
        last_vmt = vmt;
        out.vmt = vmt;
        out.ct = ct;

        Graph::LstmParams lstm{P("lstm.w_ih"), P("lstm.w_hh"), P("lstm.b")};
        auto [h_new, c_new] = g.lstm_cell(ct, h, c, lstm);
        h = h_new;
        c = c_new;
        out.h_out = h;

        out.logits = g.add(g.matmul(P("out.w"), h), P("out.b"));
        return out;
    }

    // Gated memory update with the realized token of this step.
    void advance(int realized_token) {
        if (!cfg.use_context_gates) return;
        auto P = [&](const char* n) { return model.param(n); };
        auto gru = [&](Tensor* x, Tensor* state, const char* wz, const char* uz, const char* bz,
                       const char* wc, const char* uc, const char* bc) {
            Tensor* z = g.sigmoid(
                g.add(g.add(g.matmul(P(wz), x), g.matmul(P(uz), state)), P(bz)));
            Tensor* cand =
                g.tanh_(g.add(g.add(g.matmul(P(wc), x), g.matmul(P(uc), state)), P(bc)));
            // state' = state + z*(cand - state)
            return g.add(state, g.hadamard(z, g.sub(cand, state)));
        };
        mv = gru(last_vmt, mv, "mem.vis.wz", "mem.vis.uz", "mem.vis.bz", "mem.vis.wc",
                 "mem.vis.uc", "mem.vis.bc");
        Tensor* emb_tok = g.lookup(P("embed.tok"), realized_token);
        ml = gru(emb_tok, ml, "mem.lang.wz", "mem.lang.uz", "mem.lang.bz", "mem.lang.wc",
                 "mem.lang.uc", "mem.lang.bc");
    }
};

namespace {

int argmax_lowest(const std::vector<double>& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

std::vector<double> softmax_values(const std::vector<double>& logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double denom = 0.0;
    std::vector<double> p(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        denom += p[i];
    }
    for (auto& v : p) v /= denom;
    return p;
}

std::vector<double> sigmoid_values(const std::vector<double>& logits) {
    std::vector<double> p(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) p[i] = 1.0 / (1.0 + std::exp(-logits[i]));
    return p;
}

}  // namespace

Tensor* CaptionModel::build_loss(Graph& g, const TrainingSample& sample, const LambdaWeights& lw,
                                 LossParts* parts, std::mt19937_64* ss_rng,
                                 double teacher_prob) const {
    if (!sample.features) throw std::invalid_argument("model: sample has no features");
    if (sample.target_tokens.empty()) {
        throw std::invalid_argument("model: sample has no target tokens");
    }
    for (int tok : sample.target_tokens) {
        if (tok < 0 || tok >= cfg_.vocab_size) {
            throw std::invalid_argument("model: target token out of vocabulary range");
        }
    }
    if (cfg_.use_aux_heads) {
        if (static_cast<int>(sample.labels.objects.size()) != cfg_.n_objects ||
            static_cast<int>(sample.labels.actions.size()) != cfg_.n_actions) {
            throw std::invalid_argument("model: multi-label target sizes disagree with config");
        }
        if (sample.labels.category && cfg_.category_count == 0) {
            throw std::invalid_argument(
                "model: category targets supplied but the category head is disabled");
        }
        if (sample.labels.category &&
            static_cast<int>(sample.labels.category->size()) != cfg_.category_count) {
            throw std::invalid_argument("model: category target size disagrees with config");
        }
    }

    Rollout roll(*this, g, *sample.features);
    const int T = static_cast<int>(sample.target_tokens.size());

    Tensor* ce = nullptr;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    int prev_token = Vocabulary::kBos;
    for (int t = 0; t < T; ++t) {
        auto step = roll.step(prev_token);
        Tensor* step_ce = g.cross_entropy(step.logits, sample.target_tokens[t]);
        ce = ce ? g.add(ce, step_ce) : step_ce;
        const int teacher = sample.target_tokens[t];
        roll.advance(teacher);
        if (ss_rng && coin(*ss_rng) > teacher_prob) {
            prev_token = argmax_lowest(step.logits->val);
        } else {
            prev_token = teacher;
        }
    }

    Tensor* total = ce;
    double ah_value = 0.0;
    if (cfg_.use_aux_heads) {
        Tensor* ah = g.scale(g.bce_with_logits(roll.obj_logits, sample.labels.objects), lw.obj);
        ah = g.add(ah,
                   g.scale(g.bce_with_logits(roll.act_logits, sample.labels.actions), lw.act));
        if (roll.cat_logits && sample.labels.category) {
            ah = g.add(ah,
                       g.scale(g.bce_with_logits(roll.cat_logits, *sample.labels.category),
                               lw.cat));
        }
        ah_value = ah->val[0];
        total = g.add(total, ah);
    }

    // Coherence: time-independent feature streams contribute T times their
    // adjacent-frame L1; attention contributes per-step adjacent-frame L1.
    Tensor* cl = g.scale(g.coherent_l1(roll.a_ref), lw.fcl * T);
    cl = g.add(cl, g.scale(g.coherent_l1(roll.m_ref), lw.mcl * T));
    cl = g.add(cl, g.scale(g.coherent_l1(roll.o_ref), lw.ocl * T));
    Tensor* alpha_cl = nullptr;
    for (Tensor* alpha : roll.alphas) {
        Tensor* one = g.coherent_l1(alpha);
        alpha_cl = alpha_cl ? g.add(alpha_cl, one) : one;
    }
    cl = g.add(cl, g.scale(alpha_cl, lw.acl));
    total = g.add(total, cl);

    if (parts) {
        parts->ce = ce->val[0];
        parts->ah = ah_value;
        parts->cl = cl->val[0];
        parts->total = total->val[0];
    }
    if (!std::isfinite(total->val[0])) {
        throw std::runtime_error("model: non-finite loss");
    }
    return total;
}

DecodeResult CaptionModel::greedy_decode(const VideoFeatures& vf) const {
    Graph g(false);
    Rollout roll(*this, g, vf);

    DecodeResult result;
    int prev_token = Vocabulary::kBos;
    for (int t = 0; t < cfg_.max_len; ++t) {
        auto step = roll.step(prev_token);
        const auto probs = softmax_values(step.logits->val);
        const int token = argmax_lowest(step.logits->val);

        DecodeStepInfo info;
        info.token = token;
        info.confidence = probs[token];
        info.source_gate_mean = step.source_gate_mean;
        info.target_gate_mean = step.target_gate_mean;
        info.alpha = step.alpha->val;
        result.steps.push_back(std::move(info));

        if (token == Vocabulary::kEos) break;
        roll.advance(token);
        prev_token = token;
    }
    for (const auto& s : result.steps) {
        if (s.token > Vocabulary::kUnk) result.caption_ids.push_back(s.token);
    }
    return result;
}

ForwardTrace CaptionModel::trace(const VideoFeatures& vf,
                                 const std::vector<int>& teacher_tokens) const {
    if (teacher_tokens.empty()) {
        throw std::invalid_argument("model: trace needs at least one teacher token");
    }
    Graph g(false);
    Rollout roll(*this, g, vf);

    ForwardTrace tr;
    tr.app_refined = roll.a_ref->val;
    tr.mot_refined = roll.m_ref->val;
    tr.obj_refined = roll.o_ref->val;
    if (roll.obj_logits) tr.obj_probs = sigmoid_values(roll.obj_logits->val);
    if (roll.act_logits) tr.act_probs = sigmoid_values(roll.act_logits->val);
    if (roll.cat_logits) tr.cat_probs = sigmoid_values(roll.cat_logits->val);

    int prev = Vocabulary::kBos;
    for (int tok : teacher_tokens) {
        auto step = roll.step(prev);
        StepTraceEntry e;
        e.alpha = step.alpha->val;
        if (step.enc_gates) e.enc_gates = step.enc_gates->val;
        if (step.dec_gates) e.dec_gates = step.dec_gates->val;
        e.attended_app = step.a_t->val;
        e.attended_mot = step.m_t->val;
        e.attended_obj = step.o_t->val;
        e.v_mt = step.vmt->val;
        e.c_t = step.ct->val;
        e.h = step.h_out->val;
        e.logits = step.logits->val;
        e.probs = softmax_values(step.logits->val);
        tr.steps.push_back(std::move(e));
        roll.advance(tok);
        prev = tok;
    }
    return tr;
}

MultiLabelTargets make_label_targets(const std::string& caption, const Lexica& lexica,
                                     std::optional<int> category, int category_count) {
    MultiLabelTargets targets;
    targets.objects.assign(lexica.objects.size(), 0.0);
    targets.actions.assign(lexica.actions.size(), 0.0);
    const TermLists terms = extract_terms(caption, lexica);
    auto mark = [](const std::set<std::string>& space, const std::vector<std::string>& found,
                   std::vector<double>& out) {
        for (const auto& stem : found) {
            const auto it = space.find(stem);
            if (it != space.end()) {
                out[static_cast<std::size_t>(std::distance(space.begin(), it))] = 1.0;
            }
        }
    };
    mark(lexica.objects, terms.objects, targets.objects);
    mark(lexica.actions, terms.actions, targets.actions);
    if (category && category_count > 0) {
        if (*category < 0 || *category >= category_count) {
            throw std::invalid_argument("model: category id out of range");
        }
        std::vector<double> cat(category_count, 0.0);
        cat[*category] = 1.0;
        targets.category = std::move(cat);
    }
    return targets;
}

}  // namespace vidcap

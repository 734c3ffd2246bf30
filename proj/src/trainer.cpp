// SPDX-License-Identifier: Apache-2.0
#include "vidcap/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vidcap/checkpoint.hpp"
#include "vidcap/coaha.hpp"
#include "vidcap/embedding.hpp"
#include "vidcap/ngram_metrics.hpp"
#include "vidcap/parallel.hpp"

namespace vidcap {

using nlohmann::json;

TrainConfig TrainConfig::from_config(const KeyValueConfig& cfg) {
    TrainConfig t;
    t.learning_rate = cfg.get_double("learning_rate", t.learning_rate);
    t.clip_norm = cfg.get_double("clip_norm", t.clip_norm);
    t.batch_size = static_cast<int>(cfg.get_int("batch_size", t.batch_size));
    t.epochs = static_cast<int>(cfg.get_int("epochs", t.epochs));
    t.seed = static_cast<unsigned long long>(cfg.get_int("seed", static_cast<long>(t.seed)));
    t.lambdas.acl = cfg.get_double("lambda_acl", t.lambdas.acl);
    t.lambdas.fcl = cfg.get_double("lambda_fcl", t.lambdas.fcl);
    t.lambdas.mcl = cfg.get_double("lambda_mcl", t.lambdas.mcl);
    t.lambdas.ocl = cfg.get_double("lambda_ocl", t.lambdas.ocl);
    t.lambdas.cat = cfg.get_double("lambda_c", t.lambdas.cat);
    t.lambdas.act = cfg.get_double("lambda_a", t.lambdas.act);
    t.lambdas.obj = cfg.get_double("lambda_o", t.lambdas.obj);
    t.strategy = cfg.get_string("strategy", t.strategy);
    t.ss_floor = cfg.get_double("ss_floor", t.ss_floor);
    t.d = static_cast<int>(cfg.get_int("d", t.d));
    t.e = static_cast<int>(cfg.get_int("e", t.e));
    t.m = static_cast<int>(cfg.get_int("m", t.m));
    if (cfg.has("n")) t.n_frames = static_cast<int>(cfg.get_int("n", 0));
    t.vocab_min_count = static_cast<int>(cfg.get_int("vocab_min_count", t.vocab_min_count));
    t.max_len = static_cast<int>(cfg.get_int("max_len", t.max_len));
    t.use_aux_heads = cfg.get_bool("use_aux_heads", t.use_aux_heads);
    t.use_context_gates = cfg.get_bool("use_context_gates", t.use_context_gates);
    t.use_category_head = cfg.get_bool("use_category_head", t.use_category_head);
    t.val_every = static_cast<int>(cfg.get_int("val_every", t.val_every));
    t.validate();
    return t;
}

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be > 0");
    if (clip_norm <= 0.0) throw std::invalid_argument("train: clip_norm must be > 0");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (strategy != "teacher_forcing" && strategy != "scheduled_sampling") {
        throw std::invalid_argument("train: unknown strategy '" + strategy + "'");
    }
    if (ss_floor <= 0.0 || ss_floor > 1.0) {
        throw std::invalid_argument("train: ss_floor must lie in (0, 1]");
    }
    if (d < 1 || e < 1 || m < 1) throw std::invalid_argument("train: dims must be positive");
    if (vocab_min_count < 1) throw std::invalid_argument("train: vocab_min_count must be >= 1");
    if (max_len < 1) throw std::invalid_argument("train: max_len must be >= 1");
    if (val_every < 1) throw std::invalid_argument("train: val_every must be >= 1");
}

void adam_step(const std::vector<ad::Tensor*>& params, AdamState& state, double lr, double beta1,
               double beta2, double eps) {
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i].assign(params[i]->numel(), 0.0);
            state.v[i].assign(params[i]->numel(), 0.0);
        }
    }
    if (state.m.size() != params.size()) {
        throw std::invalid_argument("adam: state size disagrees with parameter list");
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        ad::Tensor* p = params[i];
        p->ensure_grad();
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (int j = 0; j < p->numel(); ++j) {
            const double g = p->grad[j];
            if (!std::isfinite(g)) throw std::runtime_error("adam: non-finite gradient");
            m[j] = beta1 * m[j] + (1.0 - beta1) * g;
            v[j] = beta2 * v[j] + (1.0 - beta2) * g * g;
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            p->val[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

double clip_gradients(const std::vector<ad::Tensor*>& params, double max_norm) {
    double sq = 0.0;
    for (ad::Tensor* p : params) {
        p->ensure_grad();
        for (double g : p->grad) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) throw std::runtime_error("clip: non-finite gradient norm");
    if (norm <= max_norm || norm == 0.0) return norm;
    const double scale = max_norm / norm;
    for (ad::Tensor* p : params) {
        for (double& g : p->grad) g *= scale;
    }
    return max_norm;
}

double scheduled_sampling_prob(int epoch, int total_epochs, double floor) {
    if (floor <= 0.0 || floor > 1.0) {
        throw std::invalid_argument("scheduled_sampling: floor must lie in (0, 1]");
    }
    if (epoch < 0 || epoch >= total_epochs) {
        throw std::invalid_argument("scheduled_sampling: epoch out of range");
    }
    if (total_epochs == 1) return 1.0;
    const double frac = static_cast<double>(epoch) / static_cast<double>(total_epochs - 1);
    return 1.0 - (1.0 - floor) * frac;
}

namespace {

std::string rng_to_string(const std::mt19937_64& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

void rng_from_string(std::mt19937_64& rng, const std::string& s) {
    std::istringstream is(s);
    is >> rng;
    if (!is) throw std::runtime_error("train: corrupt RNG state in checkpoint manifest");
}

json train_config_to_json(const TrainConfig& t) {
    return json{{"learning_rate", t.learning_rate},
                {"clip_norm", t.clip_norm},
                {"batch_size", t.batch_size},
                {"epochs", t.epochs},
                {"seed", t.seed},
                {"lambda_acl", t.lambdas.acl},
                {"lambda_fcl", t.lambdas.fcl},
                {"lambda_mcl", t.lambdas.mcl},
                {"lambda_ocl", t.lambdas.ocl},
                {"lambda_c", t.lambdas.cat},
                {"lambda_a", t.lambdas.act},
                {"lambda_o", t.lambdas.obj},
                {"strategy", t.strategy},
                {"ss_floor", t.ss_floor},
                {"d", t.d},
                {"e", t.e},
                {"m", t.m},
                {"vocab_min_count", t.vocab_min_count},
                {"max_len", t.max_len},
                {"use_aux_heads", t.use_aux_heads},
                {"use_context_gates", t.use_context_gates},
                {"use_category_head", t.use_category_head},
                {"val_every", t.val_every}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig t;
    t.learning_rate = j.at("learning_rate").get<double>();
    t.clip_norm = j.at("clip_norm").get<double>();
    t.batch_size = j.at("batch_size").get<int>();
    t.epochs = j.at("epochs").get<int>();
    t.seed = j.at("seed").get<unsigned long long>();
    t.lambdas.acl = j.at("lambda_acl").get<double>();
    t.lambdas.fcl = j.at("lambda_fcl").get<double>();
    t.lambdas.mcl = j.at("lambda_mcl").get<double>();
    t.lambdas.ocl = j.at("lambda_ocl").get<double>();
    t.lambdas.cat = j.at("lambda_c").get<double>();
    t.lambdas.act = j.at("lambda_a").get<double>();
    t.lambdas.obj = j.at("lambda_o").get<double>();
    t.strategy = j.at("strategy").get<std::string>();
    t.ss_floor = j.at("ss_floor").get<double>();
    t.d = j.at("d").get<int>();
    t.e = j.at("e").get<int>();
    t.m = j.at("m").get<int>();
    t.vocab_min_count = j.at("vocab_min_count").get<int>();
    t.max_len = j.at("max_len").get<int>();
    t.use_aux_heads = j.at("use_aux_heads").get<bool>();
    t.use_context_gates = j.at("use_context_gates").get<bool>();
    t.use_category_head = j.at("use_category_head").get<bool>();
    t.val_every = j.at("val_every").get<int>();
    return t;
}

json model_config_to_json(const ModelConfig& c) {
    return json{{"d", c.d},
                {"e", c.e},
                {"m", c.m},
                {"d_a", c.d_a},
                {"d_m", c.d_m},
                {"d_o", c.d_o},
                {"vocab_size", c.vocab_size},
                {"n_objects", c.n_objects},
                {"n_actions", c.n_actions},
                {"category_count", c.category_count},
                {"use_aux_heads", c.use_aux_heads},
                {"use_context_gates", c.use_context_gates},
                {"max_len", c.max_len}};
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig c;
    c.d = j.at("d").get<int>();
    c.e = j.at("e").get<int>();
    c.m = j.at("m").get<int>();
    c.d_a = j.at("d_a").get<int>();
    c.d_m = j.at("d_m").get<int>();
    c.d_o = j.at("d_o").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.n_objects = j.at("n_objects").get<int>();
    c.n_actions = j.at("n_actions").get<int>();
    c.category_count = j.at("category_count").get<int>();
    c.use_aux_heads = j.at("use_aux_heads").get<bool>();
    c.use_context_gates = j.at("use_context_gates").get<bool>();
    c.max_len = j.at("max_len").get<int>();
    return c;
}

struct CheckpointBundle {
    ModelConfig model_config;
    TrainConfig train_config;
    std::vector<std::string> vocab_tokens;
    std::string rng_state;
    int next_epoch = 0;
    std::map<std::string, ad::Tensor> tensors;  // model params + opt.* moments
};

void save_bundle(const std::string& path, const CaptionModel& model, const TrainConfig& tc,
                 const Vocabulary& vocab, const AdamState& adam, const std::mt19937_64& rng,
                 int next_epoch) {
    std::vector<std::pair<std::string, const ad::Tensor*>> tensors;
    for (const auto& [name, t] : model.named_params()) tensors.emplace_back(name, t);

    // Adam moments ride along as named tensors.
    std::vector<std::unique_ptr<ad::Tensor>> moment_storage;
    const auto params = model.named_params();
    for (std::size_t i = 0; i < adam.m.size(); ++i) {
        auto mt = std::make_unique<ad::Tensor>(params[i].second->shape, false);
        mt->val = adam.m[i];
        auto vt = std::make_unique<ad::Tensor>(params[i].second->shape, false);
        vt->val = adam.v[i];
        tensors.emplace_back("opt.m." + params[i].first, mt.get());
        tensors.emplace_back("opt.v." + params[i].first, vt.get());
        moment_storage.push_back(std::move(mt));
        moment_storage.push_back(std::move(vt));
    }
    save_tensors(path, tensors);

    json manifest;
    manifest["format"] = "vidcap-checkpoint";
    manifest["version"] = 1;
    manifest["model"] = model_config_to_json(model.config());
    manifest["train"] = train_config_to_json(tc);
    manifest["vocab"] = vocab.tokens();
    manifest["seed"] = tc.seed;
    manifest["rng_state"] = rng_to_string(rng);
    manifest["next_epoch"] = next_epoch;
    manifest["adam_step"] = adam.step;
    std::ofstream out(path + ".json", std::ios::trunc);
    if (!out) throw std::runtime_error("train: cannot write " + path + ".json");
    out << manifest.dump(2) << "\n";
    vocab.save(path + ".vocab.txt");
}

CheckpointBundle load_bundle(const std::string& path) {
    std::ifstream in(path + ".json");
    if (!in) throw std::invalid_argument("train: cannot open " + path + ".json");
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("train: bad checkpoint manifest: " + std::string(e.what()));
    }
    CheckpointBundle b;
    b.model_config = model_config_from_json(manifest.at("model"));
    b.train_config = train_config_from_json(manifest.at("train"));
    for (const auto& tok : manifest.at("vocab")) {
        b.vocab_tokens.push_back(tok.get<std::string>());
    }
    b.rng_state = manifest.at("rng_state").get<std::string>();
    b.next_epoch = manifest.at("next_epoch").get<int>();
    b.tensors = load_tensors(path);
    return b;
}

struct PreparedData {
    std::map<std::string, VideoFeatures> features;
    std::vector<TrainingSample> samples;
    std::map<std::string, std::vector<std::string>> val_refs;
    std::map<std::string, ReferenceSet> val_refsets;
};

PreparedData prepare_data(const Corpus& corpus, const Vocabulary& vocab, const TrainConfig& tc,
                          int category_count) {
    PreparedData data;
    for (const auto& id : corpus.train_ids) data.features[id] = corpus.features(id);
    for (const auto& id : corpus.val_ids) data.features[id] = corpus.features(id);

    for (const auto& id : corpus.train_ids) {
        auto rit = corpus.references.find(id);
        if (rit == corpus.references.end() || rit->second.empty()) {
            throw std::invalid_argument("train: video '" + id + "' has no captions");
        }
        for (const auto& caption : rit->second) {
            TrainingSample s;
            s.features = &data.features.at(id);
            s.target_tokens = vocab.encode(caption, tc.max_len - 1);
            s.target_tokens.push_back(Vocabulary::kEos);
            std::optional<int> category;
            if (category_count > 0) {
                auto cit = corpus.categories.find(id);
                if (cit == corpus.categories.end()) {
                    throw std::invalid_argument("train: no category for video '" + id + "'");
                }
                category = cit->second;
            }
            s.labels = make_label_targets(caption, corpus.lexica, category, category_count);
            data.samples.push_back(std::move(s));
        }
    }

    for (const auto& id : corpus.val_ids) {
        data.val_refs[id] = corpus.references.at(id);
    }
    data.val_refsets = build_reference_sets(data.val_refs, corpus.lexica);
    return data;
}

}  // namespace

std::map<std::string, DecodeResult> decode_split(const CaptionModel& model, const Corpus& corpus,
                                                 const std::vector<std::string>& ids) {
    std::vector<DecodeResult> results(ids.size());
    std::vector<std::exception_ptr> errors(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) {
        try {
            const VideoFeatures vf = corpus.features(ids[i]);
            results[i] = model.greedy_decode(vf);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    std::map<std::string, DecodeResult> out;
    for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = std::move(results[i]);
    return out;
}

TrainResult train(const TrainConfig& config, const Corpus& corpus,
                  const std::string& out_checkpoint, const std::string& log_csv,
                  const std::string& resume_from) {
    config.validate();
    if (corpus.train_ids.empty()) throw std::invalid_argument("train: empty train split");

    const int category_count =
        (config.use_aux_heads && config.use_category_head) ? corpus.category_count : 0;

    std::mt19937_64 rng(config.seed);
    Vocabulary vocab =
        Vocabulary::build(corpus.captions_of(corpus.train_ids), config.vocab_min_count);

    // Dims come from the first training video.
    const VideoFeatures probe = corpus.features(corpus.train_ids.front());
    if (config.n_frames && *config.n_frames != probe.n) {
        throw std::invalid_argument("train: config n disagrees with corpus frame count");
    }

    ModelConfig mc;
    mc.d = config.d;
    mc.e = config.e;
    mc.m = config.m;
    mc.d_a = probe.d_a;
    mc.d_m = probe.d_m;
    mc.d_o = probe.d_o;
    mc.vocab_size = vocab.size();
    mc.n_objects = static_cast<int>(corpus.lexica.objects.size());
    mc.n_actions = static_cast<int>(corpus.lexica.actions.size());
    mc.category_count = category_count;
    mc.use_aux_heads = config.use_aux_heads;
    mc.use_context_gates = config.use_context_gates;
    mc.max_len = config.max_len;

    CaptionModel model(mc);
    AdamState adam;
    int start_epoch = 0;

    if (!resume_from.empty()) {
        CheckpointBundle b = load_bundle(resume_from);
        if (model_config_to_json(b.model_config) != model_config_to_json(mc)) {
            throw std::invalid_argument("train: resume checkpoint has a different model config");
        }
        vocab = Vocabulary::from_tokens(b.vocab_tokens);
        model.load_state(b.tensors);
        const auto& names = model.named_params();
        adam.m.resize(names.size());
        adam.v.resize(names.size());
        for (std::size_t i = 0; i < names.size(); ++i) {
            adam.m[i] = b.tensors.at("opt.m." + names[i].first).val;
            adam.v[i] = b.tensors.at("opt.v." + names[i].first).val;
        }
        std::ifstream mf(resume_from + ".json");
        const json manifest = json::parse(mf);
        adam.step = manifest.at("adam_step").get<long>();
        rng_from_string(rng, b.rng_state);
        start_epoch = b.next_epoch;
    } else {
        model.init_params(rng);
    }

    PreparedData data = prepare_data(corpus, vocab, config, category_count);
    if (data.samples.empty()) throw std::invalid_argument("train: no training samples");

    EmbeddingTable table = EmbeddingTable::load(corpus.embeddings_path());

    const auto params = model.params();
    TrainResult result;

    std::ofstream csv;
    if (!log_csv.empty()) {
        csv.open(log_csv, start_epoch == 0 ? std::ios::trunc : std::ios::app);
        if (!csv) throw std::runtime_error("train: cannot write " + log_csv);
        if (start_epoch == 0) csv << "epoch,l_ce,l_ah,l_cl,coaha,bleu4\n";
    }

    std::vector<std::size_t> order(data.samples.size());

    for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
        // Re-derive the epoch order from the identity so it is a pure
        // function of the RNG state; resumed runs then replay exactly.
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        const double teacher_prob = config.strategy == "scheduled_sampling"
                                        ? scheduled_sampling_prob(epoch, config.epochs, config.ss_floor)
                                        : 1.0;
        const bool scheduled = config.strategy == "scheduled_sampling";

        EpochLog log;
        log.epoch = epoch;
        model.zero_grads();
        int in_batch = 0;
        bool aborted = false;
        for (std::size_t si = 0; si < order.size(); ++si) {
            const TrainingSample& sample = data.samples[order[si]];
            LossParts parts;
            try {
                ad::Graph g;
                ad::Tensor* loss = model.build_loss(g, sample, config.lambdas, &parts,
                                                    scheduled ? &rng : nullptr, teacher_prob);
                g.backward(loss);
                log.l_ce += parts.ce;
                log.l_ah += parts.ah;
                log.l_cl += parts.cl;
                ++in_batch;
                if (in_batch == config.batch_size || si + 1 == order.size()) {
                    const double norm = clip_gradients(params, config.clip_norm);
                    log.max_post_clip_norm = std::max(log.max_post_clip_norm, norm);
                    adam_step(params, adam, config.learning_rate);
                    model.zero_grads();
                    in_batch = 0;
                }
            } catch (const std::runtime_error&) {
                // Non-finite loss or gradients: stop, keeping the checkpoint
                // written after the last completed epoch.
                aborted = true;
                break;
            }
        }
        if (aborted) {
            result.aborted_non_finite = true;
            break;
        }
        const double n_samples = static_cast<double>(data.samples.size());
        log.l_ce /= n_samples;
        log.l_ah /= n_samples;
        log.l_cl /= n_samples;

        const bool do_val = !corpus.val_ids.empty() &&
                            ((epoch + 1) % config.val_every == 0 || epoch + 1 == config.epochs);
        if (do_val) {
            auto decodes = decode_split(model, corpus, corpus.val_ids);
            std::map<std::string, std::string> hyps;
            for (auto& [vid, dec] : decodes) hyps[vid] = vocab.decode(dec.caption_ids);
            const CorpusReport rep =
                score_corpus(hyps, data.val_refsets, corpus.lexica, table);
            log.coaha = rep.mean_coaha;
            log.bleu4 = bleu4(hyps, data.val_refs);
        }

        if (csv.is_open()) {
            csv << log.epoch << "," << log.l_ce << "," << log.l_ah << "," << log.l_cl << ",";
            if (std::isfinite(log.coaha)) csv << log.coaha;
            csv << ",";
            if (std::isfinite(log.bleu4)) csv << log.bleu4;
            csv << "\n";
        }
        result.log.push_back(log);

        save_bundle(out_checkpoint, model, config, vocab, adam, rng, epoch + 1);
    }

    if (result.log.empty() && !result.aborted_non_finite) {
        // Resuming past the final epoch: nothing to do, keep the checkpoint.
        save_bundle(out_checkpoint, model, config, vocab, adam, rng, start_epoch);
    }
    return result;
}

SavedModel SavedModel::load(const std::string& checkpoint_path) {
    CheckpointBundle b = load_bundle(checkpoint_path);
    SavedModel s{std::make_unique<CaptionModel>(b.model_config),
                 Vocabulary::from_tokens(b.vocab_tokens), b.train_config};
    s.model->load_state(b.tensors);
    return s;
}

}  // namespace vidcap

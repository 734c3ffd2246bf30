// SPDX-License-Identifier: Apache-2.0
#include "vidcap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "vidcap/corpus.hpp"
#include "vidcap/embedding.hpp"
#include "vidcap/lexicon.hpp"

namespace vidcap {

namespace {

struct ActionWord {
    const char* base;
    const char* progressive;
};

const char* kObjectWords[] = {"man",     "woman",  "dog",    "cat",    "horse",  "motorcycle",
                              "bicycle", "car",    "truck",  "ball",   "guitar", "piano",
                              "baby",    "monkey", "tiger",  "bird",   "boat",   "train",
                              "potato",  "onion",  "bowl",   "table",  "chair",  "phone",
                              "camera",  "drum",   "violin", "kitten", "plane",  "robot"};

const ActionWord kActionWords[] = {
    {"ride", "riding"},   {"play", "playing"},   {"eat", "eating"},     {"run", "running"},
    {"walk", "walking"},  {"jump", "jumping"},   {"dance", "dancing"},  {"sing", "singing"},
    {"cook", "cooking"},  {"drive", "driving"},  {"fly", "flying"},     {"swim", "swimming"},
    {"climb", "climbing"}, {"throw", "throwing"}, {"kick", "kicking"},  {"push", "pushing"},
    {"pull", "pulling"},  {"wash", "washing"},   {"paint", "painting"}, {"slice", "slicing"}};

constexpr double kSynonymJitter = 0.15;
constexpr double kPrototypeMaxCos = 0.6;
// Per-frame jitter relative to the per-video noise offset.
constexpr double kJitterFraction = 0.25;

std::vector<double> gaussian_vec(int dim, std::mt19937_64& rng, double sigma = 1.0) {
    std::normal_distribution<double> dist(0.0, sigma);
    std::vector<double> v(dim);
    for (auto& x : v) x = dist(rng);
    return v;
}

void normalize(std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n == 0.0) throw std::runtime_error("synth: zero vector during generation");
    for (auto& x : v) x /= n;
}

// Unit prototypes with pairwise |cos| below the threshold, by seeded
// rejection. Fails when the dimension cannot host that many directions.
std::vector<std::vector<double>> separated_prototypes(int count, int dim, std::mt19937_64& rng) {
    std::vector<std::vector<double>> protos;
    int attempts = 0;
    while (static_cast<int>(protos.size()) < count) {
        if (++attempts > 200 * count) {
            throw std::invalid_argument(
                "synth: feature dims too small to embed that many separated prototypes");
        }
        auto cand = gaussian_vec(dim, rng);
        normalize(cand);
        bool ok = true;
        for (const auto& p : protos) {
            double dot = 0.0;
            for (int i = 0; i < dim; ++i) dot += cand[i] * p[i];
            if (std::abs(dot) > kPrototypeMaxCos) {
                ok = false;
                break;
            }
        }
        if (ok) protos.push_back(std::move(cand));
    }
    return protos;
}

// One embedding vector per concept: synonym pairs (2i, 2i+1) share an
// orthonormal base direction, distinct pairs are orthogonal.
std::vector<std::vector<double>> concept_embeddings(int count, int dim, int base_offset,
                                                    std::mt19937_64& rng) {
    std::vector<std::vector<double>> out;
    for (int i = 0; i < count; ++i) {
        const int pair = base_offset + i / 2;
        std::vector<double> v(dim, 0.0);
        v[pair] = 1.0;
        const auto jitter = gaussian_vec(dim, rng, kSynonymJitter / std::sqrt(dim));
        for (int j = 0; j < dim; ++j) v[j] += jitter[j];
        normalize(v);
        out.push_back(std::move(v));
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

SynthConfig SynthConfig::from_config(const KeyValueConfig& cfg) {
    SynthConfig s;
    s.num_videos = static_cast<int>(cfg.get_int("num_videos", s.num_videos));
    s.n_frames = static_cast<int>(cfg.get_int("n_frames", s.n_frames));
    s.k_objects = static_cast<int>(cfg.get_int("k_objects", s.k_objects));
    s.k_actions = static_cast<int>(cfg.get_int("k_actions", s.k_actions));
    s.d_a = static_cast<int>(cfg.get_int("d_a", s.d_a));
    s.d_m = static_cast<int>(cfg.get_int("d_m", s.d_m));
    s.d_o = static_cast<int>(cfg.get_int("d_o", s.d_o));
    s.emb_dim = static_cast<int>(cfg.get_int("emb_dim", s.emb_dim));
    s.noise_sigma = cfg.get_double("noise_sigma", s.noise_sigma);
    s.refs_per_video = static_cast<int>(cfg.get_int("refs_per_video", s.refs_per_video));
    s.seed = static_cast<unsigned long long>(cfg.get_int("seed", static_cast<long>(s.seed)));
    s.category_count = static_cast<int>(cfg.get_int("category_count", s.category_count));
    return s;
}

void SynthConfig::validate() const {
    if (num_videos < 3) throw std::invalid_argument("synth: num_videos must be >= 3");
    if (n_frames < 2) throw std::invalid_argument("synth: n_frames must be >= 2");
    if (k_objects < 2 || k_actions < 2) {
        throw std::invalid_argument("synth: k_objects and k_actions must be >= 2");
    }
    if (k_objects > static_cast<int>(std::size(kObjectWords)) ||
        k_actions > static_cast<int>(std::size(kActionWords))) {
        throw std::invalid_argument("synth: concept counts exceed the built-in word lists");
    }
    if (d_a < 1 || d_m < 1 || d_o < 1) throw std::invalid_argument("synth: feature dims must be positive");
    if (noise_sigma < 0.0) throw std::invalid_argument("synth: noise_sigma must be >= 0");
    if (refs_per_video < 1) throw std::invalid_argument("synth: refs_per_video must be >= 1");
    if (category_count < 0) throw std::invalid_argument("synth: category_count must be >= 0");
    const int pairs = (k_objects + 1) / 2 + (k_actions + 1) / 2;
    if (emb_dim < pairs) {
        throw std::invalid_argument(
            "synth: emb_dim too small to host orthogonal synonym-pair bases (need >= " +
            std::to_string(pairs) + ")");
    }
}

void generate_corpus(const SynthConfig& config, const std::string& out_dir) {
    config.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir + "/features");

    std::mt19937_64 rng(config.seed);

    // Concept stems, via the same stemmer the extraction rules use. The
    // progressive form must stem to the same concept stem as the base form.
    std::vector<std::string> object_surfaces, object_stems;
    for (int i = 0; i < config.k_objects; ++i) {
        object_surfaces.emplace_back(kObjectWords[i]);
        object_stems.push_back(porter_stem(object_surfaces.back()));
    }
    std::vector<std::string> action_bases, action_progressives, action_stems;
    for (int i = 0; i < config.k_actions; ++i) {
        action_bases.emplace_back(kActionWords[i].base);
        action_progressives.emplace_back(kActionWords[i].progressive);
        const std::string stem = porter_stem(action_progressives.back());
        if (stem != porter_stem(action_bases.back())) {
            throw std::logic_error("synth: word list lacks morphological closure for '" +
                                   action_bases.back() + "'");
        }
        action_stems.push_back(stem);
    }

    // Embedding table with synonym-pair structure.
    const int obj_pairs = (config.k_objects + 1) / 2;
    const auto obj_vectors = concept_embeddings(config.k_objects, config.emb_dim, 0, rng);
    const auto act_vectors =
        concept_embeddings(config.k_actions, config.emb_dim, obj_pairs, rng);

    // Feature prototypes.
    const auto app_protos = separated_prototypes(config.k_objects, config.d_a, rng);
    const auto obj_protos = separated_prototypes(config.k_objects, config.d_o, rng);
    const auto mot_protos = separated_prototypes(config.k_actions, config.d_m, rng);

    // Per-video concept assignment and derived seeds.
    std::uniform_int_distribution<int> obj_dist(0, config.k_objects - 1);
    std::uniform_int_distribution<int> act_dist(0, config.k_actions - 1);
    std::vector<std::string> ids;
    std::vector<int> video_obj(config.num_videos), video_act(config.num_videos);
    std::vector<unsigned long long> video_seed(config.num_videos);
    for (int v = 0; v < config.num_videos; ++v) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "vid%04d", v);
        ids.emplace_back(buf);
        video_obj[v] = obj_dist(rng);
        video_act[v] = act_dist(rng);
        video_seed[v] = rng();
    }

    // Features: prototype + temporally coherent Gaussian noise. The noise is
    // a per-video offset plus a small per-frame jitter, so consecutive frames
    // stay nearly identical (as in real video) while videos of one concept
    // still scatter around the prototype.
    for (int v = 0; v < config.num_videos; ++v) {
        std::mt19937_64 vrng(video_seed[v]);
        std::normal_distribution<double> offset_noise(0.0, config.noise_sigma);
        std::normal_distribution<double> jitter_noise(0.0, config.noise_sigma * kJitterFraction);
        VideoFeatures vf;
        vf.video_id = ids[v];
        vf.n = config.n_frames;
        vf.d_a = config.d_a;
        vf.d_m = config.d_m;
        vf.d_o = config.d_o;
        auto fill_stream = [&](std::vector<double>& stream, const std::vector<double>& proto,
                               int dim) {
            stream.resize(static_cast<std::size_t>(config.n_frames) * dim);
            std::vector<double> offset(dim, 0.0);
            if (config.noise_sigma > 0.0) {
                for (auto& x : offset) x = offset_noise(vrng);
            }
            for (int f = 0; f < config.n_frames; ++f) {
                for (int j = 0; j < dim; ++j) {
                    const double jitter =
                        config.noise_sigma > 0.0 ? jitter_noise(vrng) : 0.0;
                    stream[static_cast<std::size_t>(f) * dim + j] = proto[j] + offset[j] + jitter;
                }
            }
        };
        fill_stream(vf.appearance, app_protos[video_obj[v]], config.d_a);
        fill_stream(vf.motion, mot_protos[video_act[v]], config.d_m);
        fill_stream(vf.object, obj_protos[video_obj[v]], config.d_o);
        save_features(out_dir + "/features/" + ids[v] + ".bin", vf);
    }

    // Captions from the shared template grammar.
    std::vector<CaptionRecord> records;
    for (int v = 0; v < config.num_videos; ++v) {
        for (int r = 0; r < config.refs_per_video; ++r) {
            const std::string article = (r % 2 == 0) ? "a" : "the";
            const std::string caption = article + " " + object_surfaces[video_obj[v]] + " is " +
                                        action_progressives[video_act[v]];
            records.push_back({ids[v], caption});
        }
    }
    save_captions_jsonl(out_dir + "/captions.jsonl", records);

    // Embedding table: stem entries plus surface aliases sharing the vector.
    {
        std::vector<std::pair<std::string, const std::vector<double>*>> rows;
        std::set<std::string> used;
        auto add_row = [&](const std::string& token, const std::vector<double>* vec) {
            if (used.insert(token).second) rows.emplace_back(token, vec);
        };
        for (int i = 0; i < config.k_objects; ++i) {
            add_row(object_stems[i], &obj_vectors[i]);
            add_row(object_surfaces[i], &obj_vectors[i]);
        }
        for (int i = 0; i < config.k_actions; ++i) {
            add_row(action_stems[i], &act_vectors[i]);
            add_row(action_bases[i], &act_vectors[i]);
            add_row(action_progressives[i], &act_vectors[i]);
        }
        std::ofstream out(out_dir + "/embeddings.vec", std::ios::trunc);
        if (!out) throw std::runtime_error("synth: cannot write embeddings.vec");
        out << rows.size() << " " << config.emb_dim << "\n";
        for (const auto& [token, vec] : rows) {
            out << token;
            for (double x : *vec) out << " " << format_double(x);
            out << "\n";
        }
    }

    // Seed lists: the concept stems.
    {
        std::ofstream obj_out(out_dir + "/objects.txt", std::ios::trunc);
        for (const auto& s : object_stems) obj_out << s << "\n";
        std::ofstream act_out(out_dir + "/actions.txt", std::ios::trunc);
        for (const auto& s : action_stems) act_out << s << "\n";
    }

    // Categories: object-concept synonym pair index modulo category_count.
    if (config.category_count > 0) {
        std::ofstream out(out_dir + "/categories.jsonl", std::ios::trunc);
        for (int v = 0; v < config.num_videos; ++v) {
            nlohmann::json j;
            j["video_id"] = ids[v];
            j["category"] = (video_obj[v] / 2) % config.category_count;
            out << j.dump() << "\n";
        }
    }

    // Split manifest: seeded shuffle, 70/15/15 with non-empty splits.
    std::vector<std::string> shuffled = ids;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const int n = config.num_videos;
    int n_val = std::max(1, static_cast<int>(std::lround(0.15 * n)));
    int n_test = std::max(1, static_cast<int>(std::lround(0.15 * n)));
    const int n_train = n - n_val - n_test;
    if (n_train < 1) throw std::invalid_argument("synth: too few videos to split");

    nlohmann::json manifest;
    manifest["format"] = "vidcap-corpus";
    manifest["version"] = 1;
    manifest["category_count"] = config.category_count;
    manifest["splits"]["train"] =
        std::vector<std::string>(shuffled.begin(), shuffled.begin() + n_train);
    manifest["splits"]["val"] =
        std::vector<std::string>(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
    manifest["splits"]["test"] =
        std::vector<std::string>(shuffled.begin() + n_train + n_val, shuffled.end());
    manifest["config"] = {{"num_videos", config.num_videos},
                          {"n_frames", config.n_frames},
                          {"k_objects", config.k_objects},
                          {"k_actions", config.k_actions},
                          {"d_a", config.d_a},
                          {"d_m", config.d_m},
                          {"d_o", config.d_o},
                          {"emb_dim", config.emb_dim},
                          {"noise_sigma", config.noise_sigma},
                          {"refs_per_video", config.refs_per_video},
                          {"seed", config.seed},
                          {"category_count", config.category_count}};
    std::ofstream mf(out_dir + "/manifest.json", std::ios::trunc);
    if (!mf) throw std::runtime_error("synth: cannot write manifest.json");
    mf << manifest.dump(2) << "\n";
}

}  // namespace vidcap

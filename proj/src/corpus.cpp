// SPDX-License-Identifier: Apache-2.0
#include "vidcap/corpus.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace vidcap {

namespace {

constexpr char kMagic[4] = {'H', 'R', 'I', 'G'};
constexpr unsigned char kVersion = 0x01;

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error("features: truncated header in " + path);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32_block(std::ofstream& out, const std::vector<double>& values) {
    for (double d : values) {
        float f = static_cast<float>(d);
        std::uint32_t v = 0;
        std::memcpy(&v, &f, 4);
        if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
        out.write(reinterpret_cast<const char*>(&v), 4);
    }
}

void get_f32_block(std::ifstream& in, std::vector<double>& values, std::size_t count,
                   const std::string& path) {
    values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t v = 0;
        if (!in.read(reinterpret_cast<char*>(&v), 4)) {
            throw std::runtime_error("features: truncated data in " + path);
        }
        if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
        float f = 0.0f;
        std::memcpy(&f, &v, 4);
        values[i] = static_cast<double>(f);
    }
}

}  // namespace

void VideoFeatures::validate() const {
    if (n < 2) {
        throw std::invalid_argument("features: video '" + video_id +
                                    "' needs at least 2 frames, got " + std::to_string(n));
    }
    if (appearance.size() != static_cast<std::size_t>(n) * d_a ||
        motion.size() != static_cast<std::size_t>(n) * d_m ||
        object.size() != static_cast<std::size_t>(n) * d_o) {
        throw std::invalid_argument("features: stream sizes disagree with N for '" + video_id +
                                    "'");
    }
}

void save_features(const std::string& path, const VideoFeatures& vf) {
    vf.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("features: cannot write " + path);
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    put_u32(out, static_cast<std::uint32_t>(vf.n));
    put_u32(out, static_cast<std::uint32_t>(vf.d_a));
    put_u32(out, static_cast<std::uint32_t>(vf.d_m));
    put_u32(out, static_cast<std::uint32_t>(vf.d_o));
    put_f32_block(out, vf.appearance);
    put_f32_block(out, vf.motion);
    put_f32_block(out, vf.object);
    if (!out) throw std::runtime_error("features: write failed for " + path);
}

VideoFeatures load_features(const std::string& path, const std::string& video_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("features: cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("features: bad magic in " + path);
    }
    const int version = in.get();
    if (version != kVersion) {
        throw std::runtime_error("features: unsupported version in " + path);
    }
    VideoFeatures vf;
    vf.video_id = video_id;
    vf.n = static_cast<int>(get_u32(in, path));
    vf.d_a = static_cast<int>(get_u32(in, path));
    vf.d_m = static_cast<int>(get_u32(in, path));
    vf.d_o = static_cast<int>(get_u32(in, path));
    get_f32_block(in, vf.appearance, static_cast<std::size_t>(vf.n) * vf.d_a, path);
    get_f32_block(in, vf.motion, static_cast<std::size_t>(vf.n) * vf.d_m, path);
    get_f32_block(in, vf.object, static_cast<std::size_t>(vf.n) * vf.d_o, path);
    vf.validate();
    return vf;
}

std::vector<CaptionRecord> load_captions_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("corpus: cannot open " + path);
    std::vector<CaptionRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error("corpus: " + path + ":" + std::to_string(lineno) + ": " +
                                     e.what());
        }
        if (!j.contains("video_id") || !j.contains("caption") || !j["video_id"].is_string() ||
            !j["caption"].is_string()) {
            throw std::runtime_error("corpus: " + path + ":" + std::to_string(lineno) +
                                     ": record needs string fields video_id and caption");
        }
        records.push_back({j["video_id"].get<std::string>(), j["caption"].get<std::string>()});
    }
    if (records.empty()) throw std::runtime_error("corpus: no caption records in " + path);
    return records;
}

void save_captions_jsonl(const std::string& path, const std::vector<CaptionRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("corpus: cannot write " + path);
    for (const auto& r : records) {
        nlohmann::json j;
        j["video_id"] = r.video_id;
        j["caption"] = r.caption;
        out << j.dump() << "\n";
    }
}

std::map<std::string, std::vector<std::string>> refs_by_video(
    const std::vector<CaptionRecord>& records) {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& r : records) out[r.video_id].push_back(r.caption);
    return out;
}

const std::vector<std::string>& Corpus::split(const std::string& name) const {
    if (name == "train") return train_ids;
    if (name == "val") return val_ids;
    if (name == "test") return test_ids;
    throw std::invalid_argument("corpus: unknown split '" + name + "'");
}

std::vector<std::string> Corpus::captions_of(const std::vector<std::string>& ids) const {
    std::vector<std::string> out;
    for (const auto& id : ids) {
        auto it = references.find(id);
        if (it == references.end()) {
            throw std::invalid_argument("corpus: no captions for video '" + id + "'");
        }
        out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
}

VideoFeatures Corpus::features(const std::string& video_id) const {
    return load_features(dir + "/features/" + video_id + ".bin", video_id);
}

std::string Corpus::embeddings_path() const { return dir + "/embeddings.vec"; }

std::string Corpus::captions_path() const { return dir + "/captions.jsonl"; }

Corpus load_corpus(const std::string& dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw std::invalid_argument("corpus: cannot open " + dir + "/manifest.json");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(mf);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("corpus: bad manifest in " + dir + ": " + e.what());
    }
    if (!manifest.contains("splits")) {
        throw std::runtime_error("corpus: manifest lacks splits");
    }

    Corpus corpus;
    corpus.dir = dir;
    for (const auto& id : manifest["splits"]["train"]) {
        corpus.train_ids.push_back(id.get<std::string>());
    }
    for (const auto& id : manifest["splits"]["val"]) {
        corpus.val_ids.push_back(id.get<std::string>());
    }
    for (const auto& id : manifest["splits"]["test"]) {
        corpus.test_ids.push_back(id.get<std::string>());
    }
    corpus.category_count = manifest.value("category_count", 0);

    corpus.references = refs_by_video(load_captions_jsonl(dir + "/captions.jsonl"));

    if (corpus.category_count > 0) {
        std::ifstream cat(dir + "/categories.jsonl");
        if (!cat) throw std::invalid_argument("corpus: cannot open " + dir + "/categories.jsonl");
        std::string line;
        while (std::getline(cat, line)) {
            if (line.empty()) continue;
            const auto j = nlohmann::json::parse(line);
            corpus.categories[j["video_id"].get<std::string>()] = j["category"].get<int>();
        }
    }

    // Lexica: positional extraction over all captions, plus the seed lists.
    std::vector<std::string> all_captions;
    for (const auto& [vid, refs] : corpus.references) {
        (void)vid;
        all_captions.insert(all_captions.end(), refs.begin(), refs.end());
    }
    auto slurp_seeds = [&](const std::string& path) {
        std::set<std::string> seeds;
        std::ifstream in(path);
        std::string line;
        while (in && std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
            if (!line.empty()) seeds.insert(line);
        }
        return seeds;
    };
    corpus.lexica = build_lexica(all_captions, slurp_seeds(dir + "/objects.txt"),
                                 slurp_seeds(dir + "/actions.txt"));
    return corpus;
}

}  // namespace vidcap

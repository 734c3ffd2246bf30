// SPDX-License-Identifier: Apache-2.0
#include "vidcap/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "vidcap/lexicon.hpp"

namespace vidcap {

namespace {
const std::vector<std::string> kSpecials = {"<pad>", "<bos>", "<eos>", "<unk>"};
}

Vocabulary Vocabulary::build(const std::vector<std::string>& captions, int min_count) {
    if (min_count < 1) throw std::invalid_argument("vocab: min_count must be >= 1");
    std::map<std::string, int> counts;
    for (const auto& caption : captions) {
        for (const auto& tok : tokenize(caption)) ++counts[tok];
    }
    std::vector<std::pair<std::string, int>> kept;
    for (const auto& [tok, count] : counts) {
        if (count >= min_count) kept.emplace_back(tok, count);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> tokens = kSpecials;
    for (auto& [tok, count] : kept) {
        (void)count;
        tokens.push_back(std::move(tok));
    }
    return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < kSpecials.size() ||
        !std::equal(kSpecials.begin(), kSpecials.end(), tokens.begin())) {
        throw std::invalid_argument("vocab: first four tokens must be the reserved specials");
    }
    Vocabulary v;
    v.tokens_ = std::move(tokens);
    v.rebuild_index();
    return v;
}

void Vocabulary::rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (index_.count(tokens_[i])) {
            throw std::invalid_argument("vocab: duplicate token '" + tokens_[i] + "'");
        }
        index_[tokens_[i]] = static_cast<int>(i);
    }
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("vocab: cannot open " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        tokens.push_back(line);
    }
    while (!tokens.empty() && tokens.back().empty()) tokens.pop_back();
    return from_tokens(std::move(tokens));
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("vocab: cannot write " + path);
    for (const auto& tok : tokens_) out << tok << "\n";
}

int Vocabulary::id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) throw std::out_of_range("vocab: id out of range");
    return tokens_[id];
}

std::vector<int> Vocabulary::encode(const std::string& caption, int max_len) const {
    std::vector<int> ids;
    for (const auto& tok : tokenize(caption)) {
        if (static_cast<int>(ids.size()) >= max_len) break;
        ids.push_back(id(tok));
    }
    return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
        if (id <= kUnk) continue;
        if (!out.empty()) out += ' ';
        out += token(id);
    }
    return out;
}

}  // namespace vidcap

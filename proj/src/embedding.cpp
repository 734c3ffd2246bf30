// SPDX-License-Identifier: Apache-2.0
#include "vidcap/embedding.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vidcap/lexicon.hpp"

namespace vidcap {

EmbeddingTable::EmbeddingTable(int dim,
                               std::unordered_map<std::string, std::vector<double>> entries)
    : dim_(dim), entries_(std::move(entries)) {
    if (dim_ <= 0) throw std::invalid_argument("embedding: dim must be positive");
    if (entries_.empty()) throw std::invalid_argument("embedding: table is empty");
    for (const auto& [token, vec] : entries_) {
        if (static_cast<int>(vec.size()) != dim_) {
            throw std::invalid_argument("embedding: token '" + token + "' has " +
                                        std::to_string(vec.size()) + " components, expected " +
                                        std::to_string(dim_));
        }
    }
}

EmbeddingTable EmbeddingTable::load(const std::string& path, std::optional<std::size_t> limit) {
    if (limit && *limit == 0) throw std::invalid_argument("embedding: limit must be positive");
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("embedding: cannot open " + path);

    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("embedding: empty file " + path);
    std::istringstream hs(header);
    long long count = 0, dim = 0;
    if (!(hs >> count >> dim) || count <= 0 || dim <= 0) {
        throw std::invalid_argument("embedding: bad header '" + header + "' in " + path);
    }

    std::unordered_map<std::string, std::vector<double>> entries;
    std::string line;
    std::size_t row = 0;
    while (row < static_cast<std::size_t>(count) && std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        if (!(ls >> token)) {
            throw std::invalid_argument("embedding: malformed row " + std::to_string(row + 2));
        }
        std::vector<double> vec;
        vec.reserve(dim);
        double v = 0.0;
        while (ls >> v) vec.push_back(v);
        if (!ls.eof()) {
            throw std::invalid_argument("embedding: non-numeric component for token '" + token +
                                        "'");
        }
        if (static_cast<long long>(vec.size()) != dim) {
            throw std::invalid_argument("embedding: token '" + token + "' has " +
                                        std::to_string(vec.size()) + " components, header says " +
                                        std::to_string(dim));
        }
        if (entries.count(token)) {
            throw std::invalid_argument("embedding: duplicate token '" + token + "'");
        }
        entries.emplace(std::move(token), std::move(vec));
        ++row;
        if (limit && entries.size() >= *limit) break;
    }
    if (entries.empty()) throw std::invalid_argument("embedding: no rows read from " + path);
    return EmbeddingTable(static_cast<int>(dim), std::move(entries));
}

const std::vector<double>* EmbeddingTable::find(const std::string& token) const {
    auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
}

const std::vector<double>* EmbeddingTable::find_with_stem_fallback(
    const std::string& token) const {
    if (const auto* v = find(token)) return v;
    return find(porter_stem(token));
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: length mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double EmbeddingTable::similarity(const std::string& w1, const std::string& w2) const {
    const auto* a = find(w1);
    const auto* b = find(w2);
    if (!a) throw std::out_of_range("embedding: token '" + w1 + "' not in table");
    if (!b) throw std::out_of_range("embedding: token '" + w2 + "' not in table");
    return cosine(*a, *b);
}

double EmbeddingTable::distance(const std::string& w1, const std::string& w2) const {
    return 1.0 - similarity(w1, w2);
}

}  // namespace vidcap

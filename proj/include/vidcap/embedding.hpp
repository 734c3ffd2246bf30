// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace vidcap {

// Word-embedding table backing the semantic-distance side of the
// hallucination metric. Immutable after load; safe for concurrent reads.
//
// Note on the distance convention: the metric treats two words as close when
// their vectors point the same way, so distance(w1, w2) = 1 - cosine(w1, w2).
// Synonyms therefore contribute near-zero distance and unrelated words
// contribute ~1 (opposed vectors give 2).
class EmbeddingTable {
  public:
    EmbeddingTable(int dim, std::unordered_map<std::string, std::vector<double>> entries);

    // Textual vector format: first line "<count> <dim>", then one
    // "<token> <v1> ... <v_dim>" per line. Malformed rows are an error, not
    // skipped. `limit` caps the number of rows read.
    static EmbeddingTable load(const std::string& path, std::optional<std::size_t> limit = {});

    int dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    bool contains(const std::string& token) const { return entries_.count(token) > 0; }
    const std::vector<double>* find(const std::string& token) const;

    // Exact match on the token, then on its Porter stem.
    const std::vector<double>* find_with_stem_fallback(const std::string& token) const;

    // Cosine of the angle between the stored vectors; throws if either token
    // is missing or has a zero vector.
    double similarity(const std::string& w1, const std::string& w2) const;

    // 1 - similarity, in [0, 2].
    double distance(const std::string& w1, const std::string& w2) const;

  private:
    int dim_;
    std::unordered_map<std::string, std::vector<double>> entries_;
};

// Cosine between two raw vectors; throws on zero vectors or length mismatch.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace vidcap

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace vidcap {

// Token vocabulary with reserved indices 0..3. Built from captions with a
// minimum occurrence threshold; persisted one token per line, index = line.
class Vocabulary {
  public:
    static constexpr int kPad = 0;
    static constexpr int kBos = 1;
    static constexpr int kEos = 2;
    static constexpr int kUnk = 3;

    static Vocabulary build(const std::vector<std::string>& captions, int min_count);
    static Vocabulary from_tokens(std::vector<std::string> tokens);  // includes specials
    static Vocabulary load(const std::string& path);
    void save(const std::string& path) const;

    int id(const std::string& token) const;  // kUnk when absent
    const std::string& token(int id) const;
    int size() const { return static_cast<int>(tokens_.size()); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::vector<int> encode(const std::string& caption, int max_len) const;
    std::string decode(const std::vector<int>& ids) const;  // skips specials

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
    void rebuild_index();
};

}  // namespace vidcap

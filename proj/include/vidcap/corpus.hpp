// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vidcap/lexicon.hpp"

namespace vidcap {

// Three frame-aligned feature streams for one video, row-major [N x D].
// Stored on disk as float32 (HRIG container), held as double in memory.
struct VideoFeatures {
    std::string video_id;
    int n = 0;
    int d_a = 0, d_m = 0, d_o = 0;
    std::vector<double> appearance;  // n x d_a
    std::vector<double> motion;      // n x d_m
    std::vector<double> object;      // n x d_o

    void validate() const;
};

// Binary container: magic "HRIG", version byte 0x01, then N, D_a, D_m, D_o
// as 32-bit LE integers, then three row-major float32 blocks.
void save_features(const std::string& path, const VideoFeatures& vf);
VideoFeatures load_features(const std::string& path, const std::string& video_id);

struct CaptionRecord {
    std::string video_id;
    std::string caption;
};

// JSON-lines, one {"video_id": ..., "caption": ...} per line.
std::vector<CaptionRecord> load_captions_jsonl(const std::string& path);
void save_captions_jsonl(const std::string& path, const std::vector<CaptionRecord>& records);

std::map<std::string, std::vector<std::string>> refs_by_video(
    const std::vector<CaptionRecord>& records);

// On-disk corpus directory as produced by the generator: manifest.json,
// captions.jsonl, embeddings.vec, objects.txt/actions.txt seed lists, a
// features/ directory, and optionally categories.jsonl.
struct Corpus {
    std::string dir;
    std::vector<std::string> train_ids, val_ids, test_ids;
    std::map<std::string, std::vector<std::string>> references;
    std::map<std::string, int> categories;
    int category_count = 0;
    Lexica lexica;

    const std::vector<std::string>& split(const std::string& name) const;
    std::vector<std::string> captions_of(const std::vector<std::string>& ids) const;
    VideoFeatures features(const std::string& video_id) const;
    std::string embeddings_path() const;
    std::string captions_path() const;
};

Corpus load_corpus(const std::string& dir);

}  // namespace vidcap

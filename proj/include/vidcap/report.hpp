// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <json.hpp>

#include "vidcap/coaha.hpp"

namespace vidcap {

// Evaluation report: {"corpus": {mean_oh, mean_ah, mean_coaha, scale, bleu4,
// cider_d}, "instances": [{video_id, oh, ah, coaha, raw_*, h_o, h_a, oov}]}.
nlohmann::json make_report(const CorpusReport& corpus, double bleu, double cider);

// Throws std::runtime_error when a required key or type is missing.
void validate_report(const nlohmann::json& report);
void validate_corpus_manifest(const nlohmann::json& manifest);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace vidcap

// SPDX-License-Identifier: Apache-2.0
#include "vidcap/report.hpp"

#include <fstream>
#include <stdexcept>

namespace vidcap {

using nlohmann::json;

json make_report(const CorpusReport& corpus, double bleu, double cider) {
    json instances = json::array();
    for (const auto& rep : corpus.per_instance) {
        json inst;
        inst["video_id"] = rep.video_id;
        inst["oh"] = rep.oh;
        inst["ah"] = rep.ah;
        inst["coaha"] = rep.coaha;
        inst["raw_oh"] = rep.raw_oh;
        inst["raw_ah"] = rep.raw_ah;
        inst["raw_coaha"] = rep.raw_coaha;
        inst["h_o"] = rep.hallucinated_objects;
        inst["h_a"] = rep.hallucinated_actions;
        inst["oov"] = rep.oov_terms;
        instances.push_back(std::move(inst));
    }
    json report;
    report["corpus"] = {{"mean_oh", corpus.mean_oh},
                        {"mean_ah", corpus.mean_ah},
                        {"mean_coaha", corpus.mean_coaha},
                        {"scale", kCoahaReportScale},
                        {"bleu4", bleu},
                        {"cider_d", cider}};
    report["instances"] = std::move(instances);
    return report;
}

namespace {

void need(const json& j, const char* key, const char* where) {
    if (!j.contains(key)) {
        throw std::runtime_error(std::string("schema: missing key '") + key + "' in " + where);
    }
}

void need_number(const json& j, const char* key, const char* where) {
    need(j, key, where);
    if (!j[key].is_number()) {
        throw std::runtime_error(std::string("schema: key '") + key + "' in " + where +
                                 " is not a number");
    }
}

}  // namespace

void validate_report(const json& report) {
    need(report, "corpus", "report");
    need(report, "instances", "report");
    const json& corpus = report["corpus"];
    for (const char* key : {"mean_oh", "mean_ah", "mean_coaha", "scale", "bleu4", "cider_d"}) {
        need_number(corpus, key, "report.corpus");
    }
    if (!report["instances"].is_array()) {
        throw std::runtime_error("schema: report.instances is not an array");
    }
    for (const auto& inst : report["instances"]) {
        need(inst, "video_id", "report.instances[]");
        if (!inst["video_id"].is_string()) {
            throw std::runtime_error("schema: instance video_id is not a string");
        }
        for (const char* key : {"oh", "ah", "coaha"}) {
            need_number(inst, key, "report.instances[]");
        }
        for (const char* key : {"h_o", "h_a", "oov"}) {
            need(inst, key, "report.instances[]");
            if (!inst[key].is_array()) {
                throw std::runtime_error(std::string("schema: instance key '") + key +
                                         "' is not an array");
            }
        }
    }
}

void validate_corpus_manifest(const json& manifest) {
    need(manifest, "splits", "manifest");
    for (const char* split : {"train", "val", "test"}) {
        need(manifest["splits"], split, "manifest.splits");
        if (!manifest["splits"][split].is_array() || manifest["splits"][split].empty()) {
            throw std::runtime_error(std::string("schema: manifest split '") + split +
                                     "' is missing or empty");
        }
    }
    need(manifest, "category_count", "manifest");
    if (!manifest["category_count"].is_number_integer()) {
        throw std::runtime_error("schema: manifest category_count is not an integer");
    }
    need(manifest, "config", "manifest");
    if (!manifest["config"].is_object()) {
        throw std::runtime_error("schema: manifest config is not an object");
    }
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

}  // namespace vidcap

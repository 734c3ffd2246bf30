// SPDX-License-Identifier: Apache-2.0
//
// vidcap: synthetic-corpus captioning workbench.
//   synth              generate a synthetic feature/caption corpus
//   train              train the gated captioner on a corpus
//   caption            greedy-decode a split to hypotheses JSONL
//   evaluate           score hypotheses: BLEU-4, CIDEr-D, OH/AH/COAHA
//   analyze-confidence per-position mean token confidence CSV
//   analyze-gates      context-gate activation by token class CSV
//
// Exit codes: 0 success, 1 internal failure, 2 usage or input error.
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vidcap/coaha.hpp"
#include "vidcap/config.hpp"
#include "vidcap/corpus.hpp"
#include "vidcap/embedding.hpp"
#include "vidcap/lexicon.hpp"
#include "vidcap/ngram_metrics.hpp"
#include "vidcap/report.hpp"
#include "vidcap/synth.hpp"
#include "vidcap/trainer.hpp"

namespace {

using namespace vidcap;

int cmd_synth(const std::string& config_path, const std::string& out_dir,
              std::optional<long> seed) {
    SynthConfig config = SynthConfig::from_config(KeyValueConfig::parse_file(config_path));
    if (seed) config.seed = static_cast<unsigned long long>(*seed);
    generate_corpus(config, out_dir);
    validate_corpus_manifest(read_json(out_dir + "/manifest.json"));
    std::cout << "corpus written to " << out_dir << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& corpus_dir,
              const std::string& out_ckpt, const std::string& log_csv,
              const std::string& resume, bool no_aux_heads, bool no_context_gates,
              std::optional<long> seed) {
    TrainConfig config = config_path.empty()
                             ? TrainConfig{}
                             : TrainConfig::from_config(KeyValueConfig::parse_file(config_path));
    if (seed) config.seed = static_cast<unsigned long long>(*seed);
    if (no_aux_heads) config.use_aux_heads = false;
    if (no_context_gates) config.use_context_gates = false;
    const Corpus corpus = load_corpus(corpus_dir);
    const TrainResult result = train(config, corpus, out_ckpt, log_csv, resume);
    if (result.aborted_non_finite) {
        std::cerr << "training aborted on non-finite loss; last good checkpoint kept\n";
        return 1;
    }
    if (!result.log.empty()) {
        const EpochLog& last = result.log.back();
        std::cout << "trained " << result.log.size() << " epoch(s); final l_ce=" << last.l_ce;
        if (std::isfinite(last.coaha)) std::cout << " val_coaha=" << last.coaha;
        std::cout << "\n";
    }
    return 0;
}

int cmd_caption(const std::string& ckpt, const std::string& corpus_dir, const std::string& split,
                const std::string& out_path) {
    SavedModel saved = SavedModel::load(ckpt);
    const Corpus corpus = load_corpus(corpus_dir);
    const auto& ids = corpus.split(split);
    auto decodes = decode_split(*saved.model, corpus, ids);
    std::vector<CaptionRecord> records;
    for (const auto& id : ids) {
        records.push_back({id, saved.vocab.decode(decodes.at(id).caption_ids)});
    }
    save_captions_jsonl(out_path, records);
    // Schema check: the file must read back as a caption corpus.
    const auto back = load_captions_jsonl(out_path);
    if (back.size() != records.size()) {
        throw std::runtime_error("caption: output failed validation round-trip");
    }
    std::cout << records.size() << " hypotheses written to " << out_path << "\n";
    return 0;
}

int cmd_evaluate(const std::string& refs_path, const std::string& hyps_path,
                 const std::string& embeddings_path, const std::string& objects_path,
                 const std::string& actions_path, const std::string& out_path) {
    const auto refs = refs_by_video(load_captions_jsonl(refs_path));
    std::map<std::string, std::string> hyps;
    for (const auto& rec : load_captions_jsonl(hyps_path)) {
        if (!hyps.emplace(rec.video_id, rec.caption).second) {
            throw std::invalid_argument("evaluate: duplicate hypothesis for video '" +
                                        rec.video_id + "'");
        }
    }
    const EmbeddingTable table = EmbeddingTable::load(embeddings_path);
    const Lexica lexica = Lexica::load(objects_path, actions_path);
    const auto refsets = build_reference_sets(refs, lexica);

    const CorpusReport corpus_report = score_corpus(hyps, refsets, lexica, table);
    const double bleu = bleu4(hyps, refs);
    const double cider = cider_d(hyps, refs);

    const nlohmann::json report = make_report(corpus_report, bleu, cider);
    validate_report(report);
    write_json(out_path, report);
    std::cout << "bleu4=" << bleu << " cider_d=" << cider
              << " coaha=" << corpus_report.mean_coaha << " -> " << out_path << "\n";
    return 0;
}

int cmd_analyze_confidence(const std::string& ckpt, const std::string& corpus_dir,
                           const std::string& split, const std::string& out_path) {
    SavedModel saved = SavedModel::load(ckpt);
    const Corpus corpus = load_corpus(corpus_dir);
    auto decodes = decode_split(*saved.model, corpus, corpus.split(split));
    std::vector<double> sums;
    std::vector<long> counts;
    for (const auto& [vid, dec] : decodes) {
        (void)vid;
        for (std::size_t p = 0; p < dec.steps.size(); ++p) {
            if (p >= sums.size()) {
                sums.resize(p + 1, 0.0);
                counts.resize(p + 1, 0);
            }
            sums[p] += dec.steps[p].confidence;
            ++counts[p];
        }
    }
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("analyze-confidence: cannot write " + out_path);
    out << "position,mean_confidence,count\n";
    for (std::size_t p = 0; p < sums.size(); ++p) {
        if (counts[p] == 0) continue;
        out << (p + 1) << "," << sums[p] / counts[p] << "," << counts[p] << "\n";
    }
    std::cout << "confidence profile -> " << out_path << "\n";
    return 0;
}

int cmd_analyze_gates(const std::string& ckpt, const std::string& corpus_dir,
                      const std::string& split, const std::string& objects_path,
                      const std::string& actions_path, const std::string& out_path) {
    SavedModel saved = SavedModel::load(ckpt);
    const Corpus corpus = load_corpus(corpus_dir);
    const Lexica lexica = (!objects_path.empty() && !actions_path.empty())
                              ? Lexica::load(objects_path, actions_path)
                              : corpus.lexica;
    auto decodes = decode_split(*saved.model, corpus, corpus.split(split));

    struct Acc {
        double src = 0.0, tgt = 0.0;
        long count = 0;
    };
    Acc visual, non_visual;
    for (const auto& [vid, dec] : decodes) {
        (void)vid;
        for (const auto& step : dec.steps) {
            const std::string stem = porter_stem(saved.vocab.token(step.token));
            const bool is_visual =
                lexica.objects.count(stem) > 0 || lexica.actions.count(stem) > 0;
            Acc& acc = is_visual ? visual : non_visual;
            acc.src += step.source_gate_mean;
            acc.tgt += step.target_gate_mean;
            ++acc.count;
        }
    }
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("analyze-gates: cannot write " + out_path);
    out << "token_class,source_gate_mean,target_gate_mean,count\n";
    if (visual.count > 0) {
        out << "visual," << visual.src / visual.count << "," << visual.tgt / visual.count << ","
            << visual.count << "\n";
    }
    if (non_visual.count > 0) {
        out << "non_visual," << non_visual.src / non_visual.count << ","
            << non_visual.tgt / non_visual.count << "," << non_visual.count << "\n";
    }
    std::cout << "gate profile -> " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vidcap: gated video captioner and caption-hallucination metrics"};
    app.require_subcommand(1);

    std::string config_path, corpus_dir, out_path, split = "test";
    std::string ckpt, refs_path, hyps_path, embeddings_path, objects_path, actions_path;
    std::string log_csv, resume;
    bool no_aux_heads = false, no_context_gates = false;
    std::optional<long> seed;

    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    synth->add_option("--config", config_path, "synth config (key = value)")->required();
    synth->add_option("--out", out_path, "output corpus directory")->required();
    synth->add_option("--seed", seed, "override the config seed");

    auto* train = app.add_subcommand("train", "train the captioner");
    train->add_option("--config", config_path, "train config (key = value)");
    train->add_option("--corpus", corpus_dir, "corpus directory")->required();
    train->add_option("--out", out_path, "output checkpoint path")->required();
    train->add_option("--log", log_csv, "per-epoch CSV log path");
    train->add_option("--resume", resume, "checkpoint to resume from");
    train->add_flag("--no-aux-heads", no_aux_heads, "disable the auxiliary heads");
    train->add_flag("--no-context-gates", no_context_gates, "disable the context gates");
    train->add_option("--seed", seed, "override the config seed");

    auto* caption = app.add_subcommand("caption", "greedy-decode a split");
    caption->add_option("--checkpoint", ckpt, "checkpoint path")->required();
    caption->add_option("--corpus", corpus_dir, "corpus directory")->required();
    caption->add_option("--split", split, "train|val|test (default test)");
    caption->add_option("--out", out_path, "hypotheses JSONL path")->required();

    auto* evaluate = app.add_subcommand("evaluate", "score hypotheses against references");
    evaluate->add_option("--refs", refs_path, "references JSONL")->required();
    evaluate->add_option("--hyps", hyps_path, "hypotheses JSONL")->required();
    evaluate->add_option("--embeddings", embeddings_path, "embedding table (.vec)")->required();
    evaluate->add_option("--objects", objects_path, "object stem list")->required();
    evaluate->add_option("--actions", actions_path, "action stem list")->required();
    evaluate->add_option("--out", out_path, "report JSON path")->required();

    auto* aconf = app.add_subcommand("analyze-confidence", "mean confidence per token position");
    aconf->add_option("--checkpoint", ckpt, "checkpoint path")->required();
    aconf->add_option("--corpus", corpus_dir, "corpus directory")->required();
    aconf->add_option("--split", split, "train|val|test (default test)");
    aconf->add_option("--out", out_path, "CSV path")->required();

    auto* agates = app.add_subcommand("analyze-gates", "gate activation by token class");
    agates->add_option("--checkpoint", ckpt, "checkpoint path")->required();
    agates->add_option("--corpus", corpus_dir, "corpus directory")->required();
    agates->add_option("--split", split, "train|val|test (default test)");
    agates->add_option("--objects", objects_path, "object stem list (default: corpus lexica)");
    agates->add_option("--actions", actions_path, "action stem list (default: corpus lexica)");
    agates->add_option("--out", out_path, "CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(config_path, out_path, seed);
        if (train->parsed()) {
            return cmd_train(config_path, corpus_dir, out_path, log_csv, resume, no_aux_heads,
                             no_context_gates, seed);
        }
        if (caption->parsed()) return cmd_caption(ckpt, corpus_dir, split, out_path);
        if (evaluate->parsed()) {
            return cmd_evaluate(refs_path, hyps_path, embeddings_path, objects_path,
                                actions_path, out_path);
        }
        if (aconf->parsed()) return cmd_analyze_confidence(ckpt, corpus_dir, split, out_path);
        if (agates->parsed()) {
            return cmd_analyze_gates(ckpt, corpus_dir, split, objects_path, actions_path,
                                     out_path);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

#include "softbio/engine.hpp"

#include "softbio/error.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace softbio {

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty()) return path;
    const fs::path p(path);
    return p.is_absolute() ? path : (fs::path(base_dir) / p).lexically_normal().string();
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return content_digest(buf.str());
}

}  // namespace

EngineConfig EngineConfig::from_json(const json& doc, const std::string& base_dir) {
    if (!doc.is_object()) throw ParseError("engine config must be an object");
    EngineConfig cfg;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "vocabulary") {
                cfg.vocabulary_path = resolve(base_dir, value.get<std::string>());
            } else if (key == "color_table") {
                cfg.color_table_path = resolve(base_dir, value.get<std::string>());
            } else if (key == "cascade") {
                cfg.cascade = CascadeConfig::from_json(value);
            } else if (key == "backend") {
                cfg.backend = value.get<std::string>();
            } else if (key == "score_files") {
                for (const auto& p : value) cfg.score_files.push_back(resolve(base_dir, p.get<std::string>()));
            } else if (key == "skip_initial_frames") {
                cfg.skip_initial_frames = value.get<int>();
            } else if (key == "min_camera_bias_samples") {
                cfg.min_camera_bias_samples = value.get<std::size_t>();
            } else if (key == "fit_height_bias") {
                cfg.fit_height_bias = value.get<bool>();
            } else {
                throw ParseError("unknown config option '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

EngineConfig EngineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file", path);
    try {
        return from_json(json::parse(in), fs::path(path).parent_path().string());
    } catch (const json::exception& e) {
        throw ParseError(e.what(), path);
    } catch (const ParseError& e) {
        throw ParseError(e.message(), path);
    }
}

void EngineConfig::validate() const {
    if (backend != "precomputed" && backend != "histogram") {
        throw ParseError("backend must be 'precomputed' or 'histogram'");
    }
    if (skip_initial_frames < 0) throw ParseError("skip_initial_frames must be non-negative");
    for (const auto* path : {&vocabulary_path, &color_table_path}) {
        if (!path->empty() && !fs::exists(*path)) throw ParseError("referenced file does not exist: " + *path);
    }
    for (const auto& p : score_files) {
        if (!fs::exists(p)) throw ParseError("referenced file does not exist: " + p);
    }
    cascade.validate();
}

AttributeVocabulary EngineConfig::vocabulary() const {
    return vocabulary_path.empty() ? AttributeVocabulary::defaults() : AttributeVocabulary::load(vocabulary_path);
}

ColorTable EngineConfig::color_table() const {
    return color_table_path.empty() ? ColorTable::defaults() : ColorTable::load(color_table_path);
}

json EngineConfig::to_json() const {
    json scores = json::array();
    for (const auto& p : score_files) scores.push_back(fs::path(p).filename().string() + "@" + file_digest(p));
    return {{"vocabulary_hash", vocabulary().hash()},
            {"color_table", content_digest(color_table().to_json().dump())},
            {"cascade", cascade.to_json()},
            {"backend", backend},
            {"score_files", scores},
            {"skip_initial_frames", skip_initial_frames},
            {"min_camera_bias_samples", min_camera_bias_samples},
            {"fit_height_bias", fit_height_bias}};
}

std::string EngineConfig::digest() const { return content_digest(to_json().dump()); }

json to_json(const FrameOutcome& outcome) {
    if (outcome.result) return to_json(*outcome.result);
    return {{"error", outcome.error}};
}

std::vector<std::pair<std::string, HeightSample>> collect_height_samples(const Dataset& dataset) {
    std::vector<std::pair<std::string, HeightSample>> samples;
    for (const auto& seq : dataset.sequences) {
        if (seq.split != Split::Train) continue;
        const CameraModel& camera = dataset.camera(seq.camera_id);
        for (const auto& frame : seq.frames) {
            if (!frame.ground_truth) continue;
            const PersonCandidate* best = nullptr;
            double best_iou = 0.5;
            for (const auto& c : frame.candidates) {
                const double overlap = iou(c.bbox, frame.ground_truth->bbox);
                if (overlap >= best_iou) {
                    best_iou = overlap;
                    best = &c;
                }
            }
            if (!best) continue;
            try {
                const double annotated = estimate_height(camera, undistort(camera, frame.ground_truth->head),
                                                         undistort(camera, frame.ground_truth->feet));
                const HeightMeasurement automated = measure_height(*best, camera, HeightBias{});
                if (!automated.estimated) continue;
                samples.push_back({seq.camera_id, {*automated.estimated, annotated}});
            } catch (const GeometryError&) {
                continue;
            }
        }
    }
    return samples;
}

RetrievalService::RetrievalService(EngineConfig config, Dataset dataset)
    : config_(std::move(config)), dataset_(std::move(dataset)) {
    const AttributeVocabulary vocab = config_.vocabulary();
    if (vocab.hash() != dataset_.vocabulary.hash()) {
        throw EngineError("dataset was loaded with a different vocabulary than the engine config");
    }
    auto precomputed = std::make_shared<PrecomputedBackend>(PrecomputedBackend::from_sequences(dataset_.sequences, vocab));
    for (const auto& p : config_.score_files) precomputed->add_file(p);

    BackendRegistry registry;
    for (auto family : kAllFamilies) registry.assign(family, precomputed);
    if (config_.backend == "histogram") {
        auto histogram = std::make_shared<HistogramColorBackend>(vocab, config_.color_table());
        registry.assign(AttributeFamily::TorsoColor, histogram);
        registry.assign(AttributeFamily::LegColor, histogram);
    }
    engine_ = std::make_unique<CascadeEngine>(vocab, std::move(registry), config_.cascade);

    if (config_.fit_height_bias) {
        const auto samples = collect_height_samples(dataset_);
        if (!samples.empty()) bias_ = HeightBiasTable::fit(samples, config_.min_camera_bias_samples);
    }
    digest_ = config_.digest();
}

RetrievalResult RetrievalService::retrieve(const SequenceRecord& seq, const FrameRecord& frame,
                                           const SemanticDescription& desc) const {
    return engine_->run(frame, desc, dataset_.camera(seq.camera_id), bias_.for_camera(seq.camera_id));
}

std::vector<FrameOutcome> RetrievalService::retrieve_sequence(const SequenceRecord& seq,
                                                              const SemanticDescription& desc,
                                                              const FrameRange& range) const {
    std::vector<FrameOutcome> out;
    for (const auto& frame : seq.frames) {
        if (!range.contains(frame.frame_index)) continue;
        FrameOutcome outcome;
        try {
            outcome.result = retrieve(seq, frame, desc);
        } catch (const Error& e) {
            outcome.error = "frame " + std::to_string(frame.frame_index) + ": " + e.what();
        }
        out.push_back(std::move(outcome));
    }
    return out;
}

EvalReport RetrievalService::evaluate() const {
    EvalOptions options;
    options.skip_initial_frames = config_.skip_initial_frames;
    std::vector<SequenceSummary> summaries;
    for (const auto& seq : dataset_.sequences) {
        if (seq.split != Split::Test) continue;
        std::vector<RetrievalResult> results;
        for (const FrameRecord* frame : scored_frames(seq, options)) {
            results.push_back(retrieve(seq, *frame, seq.description));
        }
        summaries.push_back(evaluate_sequence(seq, results, options));
    }
    if (summaries.empty()) throw Error("dataset has no test-split sequences");
    return evaluate_dataset(summaries, dataset_.vocabulary.hash(), digest_);
}

}  // namespace softbio

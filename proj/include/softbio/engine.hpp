#pragma once

#include "softbio/attribute_backends.hpp"
#include "softbio/cascade.hpp"
#include "softbio/data_model.hpp"
#include "softbio/evaluation.hpp"
#include "softbio/geometry.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace softbio {

/// Resolved engine settings. Relative paths are resolved against the
/// directory of the config file.
struct EngineConfig {
    std::string vocabulary_path;
    std::string color_table_path;
    CascadeConfig cascade;
    /// "precomputed": every family from score files. "histogram": color
    /// families from the HSV baseline, the rest precomputed.
    std::string backend = "precomputed";
    std::vector<std::string> score_files;
    int skip_initial_frames = 30;
    std::size_t min_camera_bias_samples = HeightBiasTable::kDefaultMinCameraSamples;
    bool fit_height_bias = true;

    static EngineConfig from_json(const json& doc, const std::string& base_dir = ".");
    static EngineConfig load(const std::string& path);

    /// Throws when a referenced file is missing or a value is out of range.
    void validate() const;
    AttributeVocabulary vocabulary() const;
    ColorTable color_table() const;
    json to_json() const;
    /// Digest of the resolved configuration including vocabulary and color
    /// table contents.
    std::string digest() const;
};

/// Frame range [first, last], inclusive.
struct FrameRange {
    int first = 0;
    int last = std::numeric_limits<int>::max();

    bool contains(int idx) const { return idx >= first && idx <= last; }
};

struct FrameOutcome {
    std::optional<RetrievalResult> result;
    std::string error;
};

json to_json(const FrameOutcome& outcome);

/// Engine state built once over a loaded dataset: backends, per-camera
/// height biases and the cascade. Immutable and thread-safe afterwards.
class RetrievalService {
public:
    RetrievalService(EngineConfig config, Dataset dataset);

    const EngineConfig& config() const { return config_; }
    const Dataset& dataset() const { return dataset_; }
    const CascadeEngine& engine() const { return *engine_; }
    const HeightBiasTable& height_bias() const { return bias_; }
    const std::string& config_digest() const { return digest_; }

    RetrievalResult retrieve(const SequenceRecord& seq, const FrameRecord& frame,
                             const SemanticDescription& desc) const;

    /// Runs every frame in range, capturing per-frame engine errors.
    std::vector<FrameOutcome> retrieve_sequence(const SequenceRecord& seq, const SemanticDescription& desc,
                                                const FrameRange& range = {}) const;

    /// Runs each test-split sequence against its own description.
    EvalReport evaluate() const;

private:
    EngineConfig config_;
    Dataset dataset_;
    std::unique_ptr<CascadeEngine> engine_;
    HeightBiasTable bias_;
    std::string digest_;
};

/// Training samples (camera id, mask-derived estimate vs annotated height)
/// from every train-split frame whose ground truth overlaps a candidate
/// with IoU >= 0.5.
std::vector<std::pair<std::string, HeightSample>> collect_height_samples(const Dataset& dataset);

}  // namespace softbio

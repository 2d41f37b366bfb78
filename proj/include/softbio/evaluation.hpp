#pragma once

#include "softbio/cascade.hpp"
#include "softbio/data_model.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace softbio {

/// Integer intersection and union areas of two boxes.
struct OverlapArea {
    std::int64_t intersection = 0;
    std::int64_t union_area = 0;
};

OverlapArea overlap_area(const BoundingBox& a, const BoundingBox& b);

/// Intersection over union; 0 when the union is empty.
double iou(const BoundingBox& detection, const BoundingBox& ground_truth);

struct FrameScore {
    std::string sequence_id;
    int frame_index = 0;
    double iou = 0.0;
    bool retrieved = false;
};

struct SequenceSummary {
    std::string sequence_id;
    std::string camera_id;
    Difficulty difficulty = Difficulty::Easy;
    std::vector<FrameScore> frames;
    double average_iou = 0.0;
};

struct DifficultyAggregate {
    Difficulty difficulty = Difficulty::Easy;
    std::size_t sequence_count = 0;
    std::size_t frame_count = 0;
    double average_iou = 0.0;
    double percent_over_04 = 0.0;
};

struct EvalReport {
    std::vector<SequenceSummary> sequences;
    double average_iou = 0.0;
    /// Fraction of scored frames with IoU > 0.4.
    double percent_over_04 = 0.0;
    /// Fraction of sequences whose average IoU exceeds 0.4.
    double percent_sequences_over_04 = 0.0;
    std::size_t frame_count = 0;
    std::vector<DifficultyAggregate> per_difficulty;  // one entry per difficulty class, in order
    std::string vocabulary_hash;
    std::string config_digest;
};

struct EvalOptions {
    /// Leading frames of every sequence excluded from scoring.
    int skip_initial_frames = 30;
};

/// Frames that carry ground truth and lie past the initial skip window.
std::vector<const FrameRecord*> scored_frames(const SequenceRecord& seq, const EvalOptions& options);

SequenceSummary evaluate_sequence(const SequenceRecord& seq, const std::vector<RetrievalResult>& results,
                                  const EvalOptions& options);

EvalReport evaluate_dataset(const std::vector<SequenceSummary>& summaries, std::string vocabulary_hash = {},
                            std::string config_digest = {});

/// Formats: "table", "sequences_csv", "difficulty_csv", "frames_csv", "json".
std::string render_report(const EvalReport& report, std::string_view format);

}  // namespace softbio

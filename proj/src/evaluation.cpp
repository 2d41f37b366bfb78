#include "softbio/evaluation.hpp"

#include "softbio/error.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace softbio {

OverlapArea overlap_area(const BoundingBox& a, const BoundingBox& b) {
    const std::int64_t ix0 = std::max<std::int64_t>(a.x, b.x);
    const std::int64_t iy0 = std::max<std::int64_t>(a.y, b.y);
    const std::int64_t ix1 = std::min<std::int64_t>(std::int64_t{a.x} + a.width, std::int64_t{b.x} + b.width);
    const std::int64_t iy1 = std::min<std::int64_t>(std::int64_t{a.y} + a.height, std::int64_t{b.y} + b.height);
    const std::int64_t inter = std::max<std::int64_t>(0, ix1 - ix0) * std::max<std::int64_t>(0, iy1 - iy0);
    const std::int64_t area_a = std::int64_t{a.width} * a.height;
    const std::int64_t area_b = std::int64_t{b.width} * b.height;
    return {inter, area_a + area_b - inter};
}

double iou(const BoundingBox& detection, const BoundingBox& ground_truth) {
    const OverlapArea o = overlap_area(detection, ground_truth);
    if (o.union_area == 0) return 0.0;
    return static_cast<double>(o.intersection) / static_cast<double>(o.union_area);
}

std::vector<const FrameRecord*> scored_frames(const SequenceRecord& seq, const EvalOptions& options) {
    std::vector<const FrameRecord*> out;
    const std::size_t skip = static_cast<std::size_t>(std::max(0, options.skip_initial_frames));
    for (std::size_t i = skip; i < seq.frames.size(); ++i) {
        if (seq.frames[i].ground_truth) out.push_back(&seq.frames[i]);
    }
    return out;
}

SequenceSummary evaluate_sequence(const SequenceRecord& seq, const std::vector<RetrievalResult>& results,
                                  const EvalOptions& options) {
    std::map<int, const RetrievalResult*> by_frame;
    for (const auto& r : results) {
        if (r.sequence_id != seq.sequence_id) {
            throw Error("result/frame mismatch: result for sequence '" + r.sequence_id + "' given for '" +
                        seq.sequence_id + "'");
        }
        if (!seq.frame(r.frame_index)) {
            throw Error("result/frame mismatch: frame " + std::to_string(r.frame_index) + " not in sequence '" +
                        seq.sequence_id + "'");
        }
        if (!by_frame.emplace(r.frame_index, &r).second) {
            throw Error("result/frame mismatch: duplicate result for frame " + std::to_string(r.frame_index));
        }
    }
    SequenceSummary summary;
    summary.sequence_id = seq.sequence_id;
    summary.camera_id = seq.camera_id;
    summary.difficulty = seq.difficulty;
    const auto frames = scored_frames(seq, options);
    if (frames.empty()) throw Error("sequence '" + seq.sequence_id + "' has no scored frames");
    double sum = 0.0;
    for (const FrameRecord* f : frames) {
        auto it = by_frame.find(f->frame_index);
        if (it == by_frame.end()) {
            throw Error("result/frame mismatch: no result for frame " + std::to_string(f->frame_index) +
                        " of sequence '" + seq.sequence_id + "'");
        }
        FrameScore score;
        score.sequence_id = seq.sequence_id;
        score.frame_index = f->frame_index;
        score.retrieved = it->second->final_bbox.has_value();
        score.iou = score.retrieved ? iou(*it->second->final_bbox, f->ground_truth->bbox) : 0.0;
        sum += score.iou;
        summary.frames.push_back(score);
    }
    summary.average_iou = sum / static_cast<double>(summary.frames.size());
    return summary;
}

namespace {

constexpr double kIouThreshold = 0.4;

struct Aggregate {
    double average_iou = 0.0;
    double percent_over = 0.0;
    double percent_sequences_over = 0.0;
    std::size_t frames = 0;
};

Aggregate aggregate(const std::vector<const SequenceSummary*>& group) {
    Aggregate a;
    if (group.empty()) return a;
    double sum_avg = 0.0;
    std::size_t over = 0, seq_over = 0;
    for (const auto* s : group) {
        sum_avg += s->average_iou;
        if (s->average_iou > kIouThreshold) ++seq_over;
        for (const auto& f : s->frames) {
            ++a.frames;
            if (f.iou > kIouThreshold) ++over;
        }
    }
    a.average_iou = sum_avg / static_cast<double>(group.size());
    a.percent_over = a.frames ? static_cast<double>(over) / static_cast<double>(a.frames) : 0.0;
    a.percent_sequences_over = static_cast<double>(seq_over) / static_cast<double>(group.size());
    return a;
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

EvalReport evaluate_dataset(const std::vector<SequenceSummary>& summaries, std::string vocabulary_hash,
                            std::string config_digest) {
    if (summaries.empty()) throw Error("no sequences to evaluate");
    EvalReport report;
    report.sequences = summaries;
    std::sort(report.sequences.begin(), report.sequences.end(),
              [](const SequenceSummary& a, const SequenceSummary& b) { return a.sequence_id < b.sequence_id; });
    std::vector<const SequenceSummary*> all;
    for (const auto& s : report.sequences) all.push_back(&s);
    const Aggregate total = aggregate(all);
    report.average_iou = total.average_iou;
    report.percent_over_04 = total.percent_over;
    report.percent_sequences_over_04 = total.percent_sequences_over;
    report.frame_count = total.frames;
    for (Difficulty d : kAllDifficulties) {
        std::vector<const SequenceSummary*> group;
        for (const auto* s : all) {
            if (s->difficulty == d) group.push_back(s);
        }
        const Aggregate g = aggregate(group);
        report.per_difficulty.push_back({d, group.size(), g.frames, g.average_iou, g.percent_over});
    }
    report.vocabulary_hash = std::move(vocabulary_hash);
    report.config_digest = std::move(config_digest);
    return report;
}

std::string render_report(const EvalReport& report, std::string_view format) {
    std::ostringstream out;
    if (format == "table") {
        out << "Person retrieval benchmark\n";
        out << "vocabulary hash: " << report.vocabulary_hash << "\n";
        out << "config digest:   " << report.config_digest << "\n";
        out << "sequences: " << report.sequences.size() << "  scored frames: " << report.frame_count << "\n\n";
        out << pad("Method", 24) << pad("Average IoU", 14) << "%w IoU>0.4\n";
        out << pad("cascade", 24) << pad(fixed(report.average_iou), 14) << fixed(report.percent_over_04) << "\n";
        out << pad("cascade (per sequence)", 24) << pad(fixed(report.average_iou), 14)
            << fixed(report.percent_sequences_over_04) << "\n\n";
        out << pad("Difficulty", 12) << pad("Sequences", 11) << pad("Frames", 9) << pad("Average IoU", 14)
            << "%w IoU>0.4\n";
        for (const auto& d : report.per_difficulty) {
            out << pad(std::string(difficulty_name(d.difficulty)), 12) << pad(std::to_string(d.sequence_count), 11)
                << pad(std::to_string(d.frame_count), 9);
            if (d.sequence_count == 0) {
                out << pad("-", 14) << "-\n";
            } else {
                out << pad(fixed(d.average_iou), 14) << fixed(d.percent_over_04) << "\n";
            }
        }
        out << "\n" << pad("Sequence", 16) << pad("Difficulty", 12) << pad("Frames", 9) << "Average IoU\n";
        for (const auto& s : report.sequences) {
            out << pad(s.sequence_id, 16) << pad(std::string(difficulty_name(s.difficulty)), 12)
                << pad(std::to_string(s.frames.size()), 9) << fixed(s.average_iou) << "\n";
        }
    } else if (format == "sequences_csv") {
        out << "sequence_id,camera_id,difficulty,frames,average_iou\n";
        for (const auto& s : report.sequences) {
            out << s.sequence_id << "," << s.camera_id << "," << difficulty_name(s.difficulty) << ","
                << s.frames.size() << "," << fixed(s.average_iou) << "\n";
        }
    } else if (format == "difficulty_csv") {
        out << "difficulty,sequences,frames,average_iou,percent_over_04\n";
        for (const auto& d : report.per_difficulty) {
            out << difficulty_name(d.difficulty) << "," << d.sequence_count << "," << d.frame_count << ","
                << fixed(d.average_iou) << "," << fixed(d.percent_over_04) << "\n";
        }
    } else if (format == "frames_csv") {
        out << "sequence_id,frame_index,retrieved,iou\n";
        for (const auto& s : report.sequences) {
            for (const auto& f : s.frames) {
                out << f.sequence_id << "," << f.frame_index << "," << (f.retrieved ? 1 : 0) << "," << fixed(f.iou)
                    << "\n";
            }
        }
    } else if (format == "json") {
        json seqs = json::array();
        for (const auto& s : report.sequences) {
            seqs.push_back({{"sequence_id", s.sequence_id},
                            {"camera_id", s.camera_id},
                            {"difficulty", std::string(difficulty_name(s.difficulty))},
                            {"frames", s.frames.size()},
                            {"average_iou", s.average_iou}});
        }
        json diffs = json::array();
        for (const auto& d : report.per_difficulty) {
            diffs.push_back({{"difficulty", std::string(difficulty_name(d.difficulty))},
                             {"sequences", d.sequence_count},
                             {"frames", d.frame_count},
                             {"average_iou", d.average_iou},
                             {"percent_over_04", d.percent_over_04}});
        }
        json doc = {{"average_iou", report.average_iou},
                    {"percent_over_04", report.percent_over_04},
                    {"percent_sequences_over_04", report.percent_sequences_over_04},
                    {"frames", report.frame_count},
                    {"sequences", seqs},
                    {"per_difficulty", diffs},
                    {"vocabulary_hash", report.vocabulary_hash},
                    {"config_digest", report.config_digest}};
        out << doc.dump(2) << "\n";
    } else {
        throw Error("unknown report format '" + std::string(format) + "'");
    }
    return out.str();
}

}  // namespace softbio

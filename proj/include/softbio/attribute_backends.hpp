#pragma once

#include "softbio/data_model.hpp"
#include "softbio/image.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace softbio {

/// Per-label confidences aligned to a family's vocabulary order. Entries lie
/// in [0, 1] and need not sum to one.
struct ScoreVector {
    AttributeFamily family = AttributeFamily::TorsoColor;
    std::vector<double> scores;

    bool operator==(const ScoreVector&) const = default;
};

/// Identifies the candidate being scored.
struct CandidateContext {
    std::string sequence_id;
    int frame_index = 0;
    const PersonCandidate* candidate = nullptr;
};

/// Attribute scoring boundary. Implementations are deterministic and safe to
/// call concurrently. An empty optional means "unavailable".
class ScoringBackend {
public:
    virtual ~ScoringBackend() = default;

    virtual std::string name() const = 0;
    virtual bool supports(AttributeFamily family) const = 0;
    /// Whether score() uses the region patch for `family`.
    virtual bool needs_patch(AttributeFamily) const { return false; }
    virtual std::optional<ScoreVector> score(const CandidateContext& ctx, AttributeFamily family,
                                             const Patch* patch) const = 0;
};

/// Checked entry point: throws EngineError for families the backend does not
/// handle, and validates what it returns.
std::optional<ScoreVector> score(const ScoringBackend& backend, const CandidateContext& ctx, AttributeFamily family,
                                 const Patch* patch = nullptr);

/// Scores produced offline by an external classifier, indexed in memory.
class PrecomputedBackend : public ScoringBackend {
public:
    explicit PrecomputedBackend(AttributeVocabulary vocab);

    static PrecomputedBackend from_files(const std::vector<std::string>& paths, const AttributeVocabulary& vocab);
    /// Indexes the attribute_scores attached to loaded candidates.
    static PrecomputedBackend from_sequences(const std::vector<SequenceRecord>& sequences,
                                             const AttributeVocabulary& vocab);

    void add_file(const std::string& path);
    void add(const std::string& sequence_id, int frame_index, const std::string& candidate_id, AttributeFamily family,
             std::vector<double> scores);

    std::string name() const override { return "precomputed"; }
    bool supports(AttributeFamily) const override { return true; }
    std::optional<ScoreVector> score(const CandidateContext& ctx, AttributeFamily family,
                                     const Patch* patch) const override;

    std::size_t size() const { return index_.size(); }

private:
    using Key = std::tuple<std::string, int, std::string, AttributeFamily>;
    AttributeVocabulary vocab_;
    std::map<Key, std::vector<double>> index_;
};

/// Region of HSV space named by a color label. Hue in degrees; an interval
/// with hue_min > hue_max wraps through 0.
struct HueRange {
    std::string label;
    double hue_min = 0.0;
    double hue_max = 360.0;
    double saturation_min = 0.0;
    double saturation_max = 1.0;
    double value_min = 0.0;
    double value_max = 1.0;
};

/// Achromatic gates plus the ordered hue table. The first matching range
/// claims a chromatic pixel.
struct ColorTable {
    std::string black_label = "black";
    std::string white_label = "white";
    std::string grey_label = "grey";
    double black_value_max = 0.2;
    double white_value_min = 0.85;
    double achromatic_saturation_max = 0.15;
    std::vector<HueRange> ranges;

    static constexpr int kHueBins = 16;

    static ColorTable defaults();
    static ColorTable from_json(const json& doc);
    static ColorTable load(const std::string& path);
    json to_json() const;
};

struct Hsv {
    double hue = 0.0;  // degrees in [0, 360)
    double saturation = 0.0;
    double value = 0.0;
};

Hsv to_hsv(const Rgb& c);

/// Fraction of valid pixels attributed to each label, aligned to `labels`.
std::vector<double> color_mass(const Patch& patch, const std::vector<std::string>& labels, const ColorTable& table);

/// color_mass normalized so the largest entry is 1.
ScoreVector histogram_color_score(const Patch& patch, const std::vector<std::string>& labels,
                                  const ColorTable& table = ColorTable::defaults(),
                                  AttributeFamily family = AttributeFamily::TorsoColor);

/// Deterministic color baseline for the torso and leg color families.
class HistogramColorBackend : public ScoringBackend {
public:
    HistogramColorBackend(AttributeVocabulary vocab, ColorTable table = ColorTable::defaults());

    std::string name() const override { return "histogram"; }
    bool supports(AttributeFamily family) const override;
    bool needs_patch(AttributeFamily family) const override { return supports(family); }
    std::optional<ScoreVector> score(const CandidateContext& ctx, AttributeFamily family,
                                     const Patch* patch) const override;

private:
    AttributeVocabulary vocab_;
    ColorTable table_;
};

/// Family -> backend routing used by the cascade.
class BackendRegistry {
public:
    void assign(AttributeFamily family, std::shared_ptr<const ScoringBackend> backend);
    const ScoringBackend* find(AttributeFamily family) const;

private:
    std::map<AttributeFamily, std::shared_ptr<const ScoringBackend>> routes_;
};

}  // namespace softbio

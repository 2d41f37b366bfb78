#pragma once

#include "softbio/attribute_backends.hpp"
#include "softbio/body_regions.hpp"
#include "softbio/data_model.hpp"
#include "softbio/geometry.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace softbio {

enum class Stage { Height, TorsoColor, TorsoType, TorsoPattern, LegColor, LegPattern, Gender };

inline constexpr std::array<Stage, 7> kStageOrder = {Stage::Height,     Stage::TorsoColor, Stage::TorsoType,
                                                     Stage::TorsoPattern, Stage::LegColor, Stage::LegPattern,
                                                     Stage::Gender};

std::string_view stage_name(Stage stage);
std::optional<Stage> stage_from_name(std::string_view name);
/// Attribute family filtered by a stage; empty for the height stage.
std::optional<AttributeFamily> stage_family(Stage stage);
Stage family_stage(AttributeFamily family);

struct CascadeConfig {
    double default_threshold = 0.5;
    std::map<AttributeFamily, double> thresholds;
    double height_slack = 0.05;
    bool match_secondary_colors = false;
    RegionBand torso_band = RegionBand::torso();
    RegionBand leg_band = RegionBand::legs();
    BandAnchor band_anchor = BandAnchor::BoundingBox;

    double threshold(AttributeFamily family) const;
    const RegionBand& band(AttributeFamily family) const;
    void validate() const;

    static CascadeConfig from_json(const json& doc);
    json to_json() const;
};

enum class StageStatus { Applied, SkippedNotDescribed, SkippedEarlyExit, SkippedEmptySet, SkippedNoCandidates };

std::string_view stage_status_name(StageStatus status);

/// Why a candidate was kept or removed at one stage.
struct CandidateDecision {
    std::string candidate_id;
    bool kept = true;
    /// "match", "above_threshold", "mismatch", "in_range", "out_of_range",
    /// "unavailable", "height_unobservable" or "gender_unverified".
    std::string reason;
    std::optional<std::string> argmax_label;
    /// Score of the queried label (the better of primary and secondary when
    /// secondary colors are matched).
    std::optional<double> score;
    std::optional<double> estimated_height;
    std::optional<double> corrected_height;
    /// Factor this stage contributes to the candidate's match score.
    std::optional<double> match_factor;
};

struct StageTrace {
    Stage stage = Stage::Height;
    StageStatus status = StageStatus::SkippedNotDescribed;
    std::optional<std::string> query_label;
    std::vector<std::string> input;
    std::vector<std::string> kept;
    std::vector<CandidateDecision> decisions;
};

enum class TerminalStatus { Retrieved, NoneRetrieved, Ambiguous };

std::string_view terminal_status_name(TerminalStatus status);

struct CascadeTrace {
    std::vector<StageTrace> stages;
    TerminalStatus status = TerminalStatus::NoneRetrieved;
    /// Candidates the final decision chose among.
    std::vector<std::string> finalists;
    std::optional<std::string> retrieved;
    /// Set when a stage removed every candidate and the decision rolled back.
    std::optional<Stage> fallback_from;
    std::map<std::string, double> match_scores;
    std::vector<std::string> flags;
};

struct RetrievalResult {
    std::string sequence_id;
    int frame_index = 0;
    std::optional<std::string> retrieved;
    std::optional<BoundingBox> final_bbox;
    CascadeTrace trace;
    double match_score = 0.0;
};

json to_json(const CascadeTrace& trace);
json to_json(const RetrievalResult& result);

/// Estimated and corrected height of one candidate, or the reason it is
/// unobservable. Head and feet come from the candidate when present, else
/// from its mask; both are undistorted before solving.
struct HeightMeasurement {
    std::optional<double> estimated;
    std::optional<double> corrected;
    ImagePoint head;
    ImagePoint feet;
    std::string failure;
};

HeightMeasurement measure_height(const PersonCandidate& candidate, const CameraModel& camera, const HeightBias& bias);

/// Keeps candidates whose corrected height lies within the class interval
/// widened by `slack`. Unobservable heights are kept and flagged.
StageTrace filter_height(const std::vector<const PersonCandidate*>& candidates, const HeightClass& height_class,
                         const CameraModel& camera, const HeightBias& bias, double slack);

using CandidateScorer = std::function<std::optional<ScoreVector>(const PersonCandidate&)>;

/// Keeps a candidate when the queried label is its argmax or scores at least
/// `threshold`. `secondary_index`, when given, is an alternative accepted
/// label. Unavailable scores keep the candidate with a flag.
StageTrace filter_attribute(const std::vector<const PersonCandidate*>& candidates, AttributeFamily family,
                            const std::vector<std::string>& labels, std::size_t query_index,
                            std::optional<std::size_t> secondary_index, const CandidateScorer& scorer,
                            double threshold);

/// Geometric mean of the match factors the candidate collected over the
/// applied stages; 1 when none apply.
double match_score(const CascadeTrace& trace, const std::string& candidate_id);

/// Fills status, finalists, retrieved and match scores from the stage
/// records. `finalists` are the survivors, or the last non-empty stage
/// output when the final stage emptied the set.
void decide_final(const std::vector<std::string>& finalists, CascadeTrace& trace);

/// Immutable after construction; run() may be called concurrently.
class CascadeEngine {
public:
    CascadeEngine(AttributeVocabulary vocab, BackendRegistry backends, CascadeConfig config);

    /// `image` overrides the frame's image_path when patches are needed.
    RetrievalResult run(const FrameRecord& frame, const SemanticDescription& desc, const CameraModel& camera,
                        const HeightBias& bias, const Image* image = nullptr) const;

    const AttributeVocabulary& vocabulary() const { return vocab_; }
    const CascadeConfig& config() const { return config_; }
    const BackendRegistry& backends() const { return backends_; }

private:
    AttributeVocabulary vocab_;
    BackendRegistry backends_;
    CascadeConfig config_;
};

}  // namespace softbio

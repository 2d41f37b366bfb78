#pragma once

#include "softbio/geometry.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace softbio {

using json = nlohmann::json;

/// Stable 64-bit FNV-1a digest rendered as 16 hex digits.
std::string content_digest(std::string_view bytes);

enum class AttributeFamily { TorsoColor, TorsoType, TorsoPattern, LegColor, LegPattern, Gender };

inline constexpr std::array<AttributeFamily, 6> kAllFamilies = {
    AttributeFamily::TorsoColor, AttributeFamily::TorsoType,  AttributeFamily::TorsoPattern,
    AttributeFamily::LegColor,   AttributeFamily::LegPattern, AttributeFamily::Gender};

std::string_view family_name(AttributeFamily family);
std::optional<AttributeFamily> family_from_name(std::string_view name);

struct HeightClass {
    std::string label;
    double min = 0.0;
    double max = std::numeric_limits<double>::infinity();
};

/// Controlled label lists. Score vectors and query labels are interpreted
/// against the order stored here.
struct AttributeVocabulary {
    std::vector<std::string> colors;
    std::vector<std::string> torso_types;
    std::vector<std::string> torso_patterns;
    std::vector<std::string> leg_patterns;
    std::vector<std::string> genders;
    std::vector<HeightClass> height_classes;

    static AttributeVocabulary defaults();
    static AttributeVocabulary from_json(const json& doc);
    static AttributeVocabulary load(const std::string& path);

    json to_json() const;
    void validate() const;
    std::string hash() const;

    const std::vector<std::string>& labels(AttributeFamily family) const;
    /// Name of the list a family draws from ("colors" for both color families).
    static std::string_view list_name(AttributeFamily family);
    std::optional<std::size_t> index_of(AttributeFamily family, std::string_view label) const;
    const HeightClass* height_class(std::string_view label) const;
    /// Class whose [min, max) interval contains `meters`.
    const HeightClass* classify_height(double meters) const;
};

/// The query. Every present label belongs to the active vocabulary.
struct SemanticDescription {
    std::optional<std::string> height_class;
    std::optional<std::string> torso_primary_color;
    std::optional<std::string> torso_secondary_color;
    std::optional<std::string> torso_type;
    std::optional<std::string> torso_pattern;
    std::optional<std::string> leg_primary_color;
    std::optional<std::string> leg_secondary_color;
    std::optional<std::string> leg_pattern;
    std::optional<std::string> gender;

    bool empty() const;
    /// Primary label queried for a family (primary color for color families).
    const std::optional<std::string>& label(AttributeFamily family) const;
    const std::optional<std::string>& secondary_color(AttributeFamily family) const;
    json to_json() const;
};

/// Accepts either a bare query object or a description document carrying a
/// "query" member. Unknown fields and labels are rejected.
SemanticDescription parse_description(const json& doc, const AttributeVocabulary& vocab);

struct BoundingBox {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool operator==(const BoundingBox&) const = default;
};

/// Binary image, row-major, one byte per pixel (0 or 1).
struct Bitmap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    Bitmap() = default;
    Bitmap(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t at(int col, int row) const { return bits[static_cast<std::size_t>(row) * width + col]; }
    void set(int col, int row, std::uint8_t value) { bits[static_cast<std::size_t>(row) * width + col] = value; }

    bool operator==(const Bitmap&) const = default;
};

/// Row-major run lengths alternating background/foreground, starting with
/// background. Only the first run may be zero.
struct InstanceMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> runs;

    bool operator==(const InstanceMask&) const = default;

    std::size_t foreground_count() const;
};

InstanceMask encode_mask(const Bitmap& bitmap);
Bitmap decode_mask(const InstanceMask& mask);
/// Throws ParseError when the run list is not the canonical encoding of a
/// width x height bitmap.
void validate_mask(const InstanceMask& mask);

struct PersonCandidate {
    std::string candidate_id;
    BoundingBox bbox;
    InstanceMask mask;  // bbox-local
    double detector_score = 0.0;
    std::optional<ImagePoint> head;
    std::optional<ImagePoint> feet;
    std::map<AttributeFamily, std::vector<double>> attribute_scores;
};

struct GroundTruth {
    BoundingBox bbox;
    ImagePoint head;
    ImagePoint feet;
};

struct FrameRecord {
    std::string sequence_id;
    int frame_index = 0;
    std::string camera_id;
    std::vector<PersonCandidate> candidates;
    std::optional<GroundTruth> ground_truth;
    /// Absolute path of the frame image, empty when none is available.
    std::string image_path;
};

enum class Difficulty { VeryEasy, Easy, Medium, Hard };

inline constexpr std::array<Difficulty, 4> kAllDifficulties = {Difficulty::VeryEasy, Difficulty::Easy,
                                                               Difficulty::Medium, Difficulty::Hard};

std::string_view difficulty_name(Difficulty d);
std::optional<Difficulty> difficulty_from_name(std::string_view name);

enum class Split { Train, Test };

struct SequenceRecord {
    std::string sequence_id;
    std::string camera_id;
    Difficulty difficulty = Difficulty::Easy;
    Split split = Split::Test;
    SemanticDescription description;
    std::vector<FrameRecord> frames;
    std::string vocabulary_hash;

    const FrameRecord* frame(int frame_index) const;
    FrameRecord* frame(int frame_index);
};

/// File locations for one sequence. `scores` and `frames_dir` are optional.
struct SequencePaths {
    std::string description;
    std::string detections;
    std::string annotations;
    std::string scores;
    std::string frames_dir;

    /// Conventional layout: description.json, detections.jsonl,
    /// annotations.jsonl, scores.jsonl and frames/ under `dir`.
    static SequencePaths in_directory(const std::string& dir);
};

SequenceRecord load_sequence(const SequencePaths& paths, const AttributeVocabulary& vocab);

/// Calibrated cameras plus every sequence under a dataset root
/// (cameras/*.calib, sequences/*/).
struct Dataset {
    std::string root;
    AttributeVocabulary vocabulary;
    std::map<std::string, CameraModel> cameras;
    std::vector<SequenceRecord> sequences;

    const SequenceRecord* sequence(std::string_view id) const;
    const CameraModel& camera(const std::string& id) const;
};

Dataset load_dataset(const std::string& root, const AttributeVocabulary& vocab);

json to_json(const BoundingBox& box);
json to_json(const ImagePoint& p);

}  // namespace softbio

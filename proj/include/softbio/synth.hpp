#pragma once

#include "softbio/data_model.hpp"
#include "softbio/geometry.hpp"
#include "softbio/image.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace softbio {

/// Camera at (x, y, mount_height) looking along +y, pitched down by
/// `tilt_deg`. Square pixels, principal point at the image center.
CameraModel look_down_camera(std::string id, int width, int height, double focal, double mount_height,
                             double tilt_deg, double k1 = 0.0, double k2 = 0.0);

struct SynthPerson {
    WorldPoint position;  // feet on the ground at frame 0
    WorldPoint velocity;  // meters per frame, f ignored
    double height = 1.7;
    double width = 0.5;
    std::string torso_color = "red";
    std::string leg_color = "blue";
    std::string torso_type = "short-sleeve";
    std::string torso_pattern = "solid";
    std::string leg_pattern = "solid";
    std::string gender = "male";
};

struct SynthSequence {
    std::string sequence_id;
    std::string camera_id;
    Difficulty difficulty = Difficulty::Easy;
    Split split = Split::Test;
    int frames = 40;
    double noise_px = 0.0;
    /// Added to the rendered top edge only (systematic head offset).
    double head_offset_px = 0.0;
    std::size_t target = 0;
    std::vector<SynthPerson> persons;
    /// Defaults to every label of the target person.
    std::optional<SemanticDescription> query;
    double max_occlusion = 0.2;
    std::uint64_t seed = 1;
};

struct SyntheticSceneSpec {
    std::vector<CameraModel> cameras;
    std::vector<SynthSequence> sequences;
    bool write_images = true;

    /// Cameras are either explicit calibrations (calibration keys) or
    /// {"id", "image_width", "image_height", "focal", "mount_height",
    /// "tilt_deg", "k1", "k2"}.
    static SyntheticSceneSpec from_json(const json& doc, const AttributeVocabulary& vocab);
    static SyntheticSceneSpec load(const std::string& path, const AttributeVocabulary& vocab);
    /// Throws ParseError naming the first violated invariant.
    void validate(const AttributeVocabulary& vocab) const;
};

/// RGB used for a color label when rendering.
Rgb synth_color(const std::string& label);

/// Projected head/feet and the rectangle a person occupies in one frame.
struct RenderedPerson {
    std::size_t person = 0;
    ImagePoint head;
    ImagePoint feet;
    BoundingBox bbox;
    double depth = 0.0;
};

/// Noise-free geometry of every person of `seq` at `frame`. Throws ParseError when a person leaves the image.
std::vector<RenderedPerson> place_persons(const SynthSequence& seq, const CameraModel& camera, int frame);

/// Writes cameras/, sequences/<id>/ and per-frame images under `root`.
void write_synthetic_dataset(const SyntheticSceneSpec& spec, const AttributeVocabulary& vocab,
                             const std::string& root);

}  // namespace softbio

#pragma once

#include "softbio/data_model.hpp"
#include "softbio/error.hpp"
#include "softbio/image.hpp"

#include <string>
#include <utility>
#include <vector>

namespace softbio {

/// Horizontal slice of a person as fractions of its height, top to bottom.
struct RegionBand {
    double top_fraction = 0.0;
    double bottom_fraction = 1.0;

    void validate() const;

    static constexpr RegionBand torso() { return {0.20, 0.50}; }
    static constexpr RegionBand legs() { return {0.50, 0.70}; }
    static constexpr RegionBand full() { return {0.0, 1.0}; }
};

/// What the band fractions are measured against.
enum class BandAnchor { BoundingBox, MaskExtent };

struct HeadFeet {
    ImagePoint head;
    ImagePoint feet;
};

/// Head and feet are the centroids of the foreground pixels in the two
/// topmost and two bottommost occupied mask rows, in frame coordinates.
HeadFeet head_feet_points(const PersonCandidate& candidate);

class EmptyBandError : public Error {
public:
    EmptyBandError() : Error("empty band") {}
};

/// Mask-local row range [first, second) selected by `band`.
std::pair<int, int> band_rows(const PersonCandidate& candidate, const RegionBand& band,
                              BandAnchor anchor = BandAnchor::BoundingBox);

/// Tight rectangle around the candidate's foreground within `band`, with
/// background pixels flagged invalid. Throws EmptyBandError when the band
/// holds no foreground.
Patch extract_patch(const PersonCandidate& candidate, const Image& frame, const RegionBand& band,
                    BandAnchor anchor = BandAnchor::BoundingBox);

enum class Interpolation { Bilinear, Nearest };

struct AugmentConfig {
    bool horizontal_flip = true;
    bool vertical_flip = true;
    std::vector<double> angles_deg = {1, 2, 3, 4, 5, -1, -2, -3, -4, -5};
    double gamma = 1.5;
    Interpolation interpolation = Interpolation::Bilinear;

    static AugmentConfig from_json(const json& doc);
    json to_json() const;

    /// Outputs emitted per input patch, the original included.
    std::size_t multiplier() const;
};

Patch flip_horizontal(const Patch& patch);
Patch flip_vertical(const Patch& patch);
/// Rotation about the patch center, same output size. A result pixel is
/// valid only if every source pixel contributing to it is valid.
Patch rotate(const Patch& patch, double angle_deg, Interpolation interp = Interpolation::Bilinear);
/// out = 255 (in / 255)^(1 / gamma) per channel on valid pixels; gamma > 1
/// brightens.
Patch apply_gamma(const Patch& patch, double gamma);

struct AugmentedPatch {
    Patch patch;
    std::size_t source = 0;
    std::string transform;
};

/// Per input: original, flips, one rotation per angle, and a gamma copy when
/// gamma != 1.
std::vector<AugmentedPatch> augment_patches(const std::vector<Patch>& patches, const AugmentConfig& config);

}  // namespace softbio

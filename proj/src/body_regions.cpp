#include "softbio/body_regions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace softbio {

void RegionBand::validate() const {
    if (!(top_fraction >= 0.0 && top_fraction < bottom_fraction && bottom_fraction <= 1.0)) {
        throw Error("invalid region band: require 0 <= top < bottom <= 1");
    }
}

namespace {

// Centroid of the foreground pixels of `rows` (mask-local), offset by the box origin.
ImagePoint rows_centroid(const Bitmap& bits, const std::vector<int>& rows, const BoundingBox& box) {
    double sum_u = 0.0, sum_v = 0.0;
    std::size_t n = 0;
    for (int row : rows) {
        for (int col = 0; col < bits.width; ++col) {
            if (bits.at(col, row)) {
                sum_u += col;
                sum_v += row;
                ++n;
            }
        }
    }
    return {box.x + sum_u / static_cast<double>(n), box.y + sum_v / static_cast<double>(n)};
}

std::vector<int> occupied_rows(const Bitmap& bits) {
    std::vector<int> rows;
    for (int row = 0; row < bits.height; ++row) {
        for (int col = 0; col < bits.width; ++col) {
            if (bits.at(col, row)) {
                rows.push_back(row);
                break;
            }
        }
    }
    return rows;
}

// Smallest integer r with r >= x, tolerant of representation error in x.
int ceil_rows(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

}  // namespace

HeadFeet head_feet_points(const PersonCandidate& candidate) {
    const Bitmap bits = decode_mask(candidate.mask);
    const std::vector<int> rows = occupied_rows(bits);
    if (rows.empty()) throw Error("empty mask for candidate '" + candidate.candidate_id + "'");
    const std::size_t take = std::min<std::size_t>(2, rows.size());
    const std::vector<int> top(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take));
    const std::vector<int> bottom(rows.end() - static_cast<std::ptrdiff_t>(take), rows.end());
    return {rows_centroid(bits, top, candidate.bbox), rows_centroid(bits, bottom, candidate.bbox)};
}

std::pair<int, int> band_rows(const PersonCandidate& candidate, const RegionBand& band, BandAnchor anchor) {
    band.validate();
    int offset = 0;
    int extent = candidate.bbox.height;
    if (anchor == BandAnchor::MaskExtent) {
        const std::vector<int> rows = occupied_rows(decode_mask(candidate.mask));
        if (rows.empty()) return {0, 0};
        offset = rows.front();
        extent = rows.back() - rows.front() + 1;
    }
    const int first = offset + ceil_rows(band.top_fraction * extent);
    const int last = offset + ceil_rows(band.bottom_fraction * extent);
    return {std::clamp(first, 0, candidate.mask.height), std::clamp(last, 0, candidate.mask.height)};
}

Patch extract_patch(const PersonCandidate& candidate, const Image& frame, const RegionBand& band, BandAnchor anchor) {
    const BoundingBox& box = candidate.bbox;
    if (box.x < 0 || box.y < 0 || box.x + box.width > frame.width || box.y + box.height > frame.height) {
        throw Error("frame image does not cover the bbox of candidate '" + candidate.candidate_id + "'");
    }
    const Bitmap bits = decode_mask(candidate.mask);
    const auto [first, last] = band_rows(candidate, band, anchor);

    int min_col = bits.width, max_col = -1, min_row = bits.height, max_row = -1;
    for (int row = first; row < last; ++row) {
        for (int col = 0; col < bits.width; ++col) {
            if (!bits.at(col, row)) continue;
            min_col = std::min(min_col, col);
            max_col = std::max(max_col, col);
            min_row = std::min(min_row, row);
            max_row = std::max(max_row, row);
        }
    }
    if (max_col < 0) throw EmptyBandError();

    Patch patch(max_col - min_col + 1, max_row - min_row + 1);
    for (int row = min_row; row <= max_row; ++row) {
        for (int col = min_col; col <= max_col; ++col) {
            const bool fg = bits.at(col, row) != 0;
            patch.set(col - min_col, row - min_row, fg ? frame.at(box.x + col, box.y + row) : Rgb{0, 0, 0}, fg);
        }
    }
    return patch;
}

// ---------------------------------------------------------------------------
// Augmentation

AugmentConfig AugmentConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("augmentation config must be an object");
    AugmentConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (key == "horizontal_flip") {
            cfg.horizontal_flip = value.get<bool>();
        } else if (key == "vertical_flip") {
            cfg.vertical_flip = value.get<bool>();
        } else if (key == "angles_deg") {
            cfg.angles_deg = value.get<std::vector<double>>();
        } else if (key == "gamma") {
            cfg.gamma = value.get<double>();
            if (!(cfg.gamma > 0.0)) throw ParseError("gamma must be positive");
        } else if (key == "interpolation") {
            const auto name = value.get<std::string>();
            if (name == "bilinear") {
                cfg.interpolation = Interpolation::Bilinear;
            } else if (name == "nearest") {
                cfg.interpolation = Interpolation::Nearest;
            } else {
                throw ParseError("unknown interpolation '" + name + "'");
            }
        } else {
            throw ParseError("unknown augmentation option '" + key + "'");
        }
    }
    return cfg;
}

json AugmentConfig::to_json() const {
    return {{"horizontal_flip", horizontal_flip},
            {"vertical_flip", vertical_flip},
            {"angles_deg", angles_deg},
            {"gamma", gamma},
            {"interpolation", interpolation == Interpolation::Bilinear ? "bilinear" : "nearest"}};
}

std::size_t AugmentConfig::multiplier() const {
    return 1 + (horizontal_flip ? 1 : 0) + (vertical_flip ? 1 : 0) + angles_deg.size() + (gamma != 1.0 ? 1 : 0);
}

Patch flip_horizontal(const Patch& patch) {
    Patch out(patch.width, patch.height);
    for (int row = 0; row < patch.height; ++row) {
        for (int col = 0; col < patch.width; ++col) {
            const int src = patch.width - 1 - col;
            out.set(col, row, patch.at(src, row), patch.is_valid(src, row));
        }
    }
    return out;
}

Patch flip_vertical(const Patch& patch) {
    Patch out(patch.width, patch.height);
    for (int row = 0; row < patch.height; ++row) {
        const int src = patch.height - 1 - row;
        for (int col = 0; col < patch.width; ++col) {
            out.set(col, row, patch.at(col, src), patch.is_valid(col, src));
        }
    }
    return out;
}

Patch rotate(const Patch& patch, double angle_deg, Interpolation interp) {
    constexpr double kWeightEpsilon = 1e-9;
    const double theta = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double cx = (patch.width - 1) / 2.0, cy = (patch.height - 1) / 2.0;
    Patch out(patch.width, patch.height);
    for (int row = 0; row < patch.height; ++row) {
        for (int col = 0; col < patch.width; ++col) {
            // Inverse map: rotate the destination offset by -theta.
            const double dx = col - cx, dy = row - cy;
            const double sx = c * dx + s * dy + cx;
            const double sy = -s * dx + c * dy + cy;
            if (interp == Interpolation::Nearest) {
                const long ix = std::lround(sx), iy = std::lround(sy);
                if (ix < 0 || iy < 0 || ix >= patch.width || iy >= patch.height) continue;
                const int px = static_cast<int>(ix), py = static_cast<int>(iy);
                if (patch.is_valid(px, py)) out.set(col, row, patch.at(px, py), true);
                continue;
            }
            const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
            const double fx = sx - x0, fy = sy - y0;
            const double weights[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
            const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
            const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
            double acc[3] = {0, 0, 0};
            double total = 0.0;
            bool ok = true;
            for (int k = 0; k < 4 && ok; ++k) {
                if (weights[k] <= kWeightEpsilon) continue;
                if (xs[k] < 0 || ys[k] < 0 || xs[k] >= patch.width || ys[k] >= patch.height ||
                    !patch.is_valid(xs[k], ys[k])) {
                    ok = false;
                    break;
                }
                const Rgb px = patch.at(xs[k], ys[k]);
                for (int ch = 0; ch < 3; ++ch) acc[ch] += weights[k] * px[ch];
                total += weights[k];
            }
            if (!ok) continue;
            Rgb value{};
            for (int ch = 0; ch < 3; ++ch) {
                value[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(acc[ch] / total), 0L, 255L));
            }
            out.set(col, row, value, true);
        }
    }
    return out;
}

Patch apply_gamma(const Patch& patch, double gamma) {
    if (gamma == 1.0) return patch;
    std::uint8_t lut[256];
    for (int i = 0; i < 256; ++i) {
        lut[i] = static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * std::pow(i / 255.0, 1.0 / gamma)), 0L, 255L));
    }
    Patch out = patch;
    for (std::size_t p = 0; p < out.valid.size(); ++p) {
        if (!out.valid[p]) continue;
        for (int ch = 0; ch < 3; ++ch) out.rgb[3 * p + ch] = lut[out.rgb[3 * p + ch]];
    }
    return out;
}

std::vector<AugmentedPatch> augment_patches(const std::vector<Patch>& patches, const AugmentConfig& config) {
    std::vector<AugmentedPatch> out;
    out.reserve(patches.size() * config.multiplier());
    for (std::size_t i = 0; i < patches.size(); ++i) {
        const Patch& p = patches[i];
        out.push_back({p, i, "original"});
        if (config.horizontal_flip) out.push_back({flip_horizontal(p), i, "flip_horizontal"});
        if (config.vertical_flip) out.push_back({flip_vertical(p), i, "flip_vertical"});
        for (double angle : config.angles_deg) {
            std::ostringstream name;
            name << "rotate_" << angle;
            out.push_back({rotate(p, angle, config.interpolation), i, name.str()});
        }
        if (config.gamma != 1.0) {
            std::ostringstream name;
            name << "gamma_" << config.gamma;
            out.push_back({apply_gamma(p, config.gamma), i, name.str()});
        }
    }
    return out;
}

}  // namespace softbio

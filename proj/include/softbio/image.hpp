#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace softbio {

using Rgb = std::array<std::uint8_t, 3>;

/// Interleaved 8-bit RGB image, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    Image() = default;
    Image(int w, int h, Rgb fill = {0, 0, 0});

    Rgb at(int col, int row) const {
        const std::size_t i = 3 * (static_cast<std::size_t>(row) * width + col);
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
    void set(int col, int row, Rgb c) {
        const std::size_t i = 3 * (static_cast<std::size_t>(row) * width + col);
        rgb[i] = c[0];
        rgb[i + 1] = c[1];
        rgb[i + 2] = c[2];
    }

    bool operator==(const Image&) const = default;
};

/// Background-free region of a person. Invalid pixels have RGB 0.
struct Patch {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;
    std::vector<std::uint8_t> valid;

    Patch() = default;
    Patch(int w, int h);

    Rgb at(int col, int row) const {
        const std::size_t i = 3 * (static_cast<std::size_t>(row) * width + col);
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
    bool is_valid(int col, int row) const { return valid[static_cast<std::size_t>(row) * width + col] != 0; }
    void set(int col, int row, Rgb c, bool v) {
        const std::size_t p = static_cast<std::size_t>(row) * width + col;
        valid[p] = v ? 1 : 0;
        rgb[3 * p] = v ? c[0] : 0;
        rgb[3 * p + 1] = v ? c[1] : 0;
        rgb[3 * p + 2] = v ? c[2] : 0;
    }
    std::size_t valid_count() const;

    bool operator==(const Patch&) const = default;
};

Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& image);
std::vector<std::uint8_t> encode_png(const Image& image);

/// Patches round-trip through RGBA PNG: alpha 0 marks invalid pixels.
Patch read_patch_png(const std::string& path);
void write_patch_png(const std::string& path, const Patch& patch);

}  // namespace softbio

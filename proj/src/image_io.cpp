#include "softbio/image.hpp"

#include "softbio/error.hpp"

#include <png.h>


namespace softbio {

Image::Image(int w, int h, Rgb fill) : width(w), height(h), rgb(3 * static_cast<std::size_t>(w) * h) {
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
        rgb[i] = fill[0];
        rgb[i + 1] = fill[1];
        rgb[i + 2] = fill[2];
    }
}

Patch::Patch(int w, int h)
    : width(w), height(h), rgb(3 * static_cast<std::size_t>(w) * h, 0), valid(static_cast<std::size_t>(w) * h, 0) {}

std::size_t Patch::valid_count() const {
    std::size_t n = 0;
    for (auto v : valid) n += v != 0;
    return n;
}

namespace {

// Reads any PNG as 8-bit RGBA.
std::vector<std::uint8_t> read_rgba(const std::string& path, int& width, int& height) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str())) {
        throw ParseError(std::string("cannot read PNG: ") + img.message, path);
    }
    img.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&img);
        throw ParseError(std::string("cannot decode PNG: ") + img.message, path);
    }
    width = static_cast<int>(img.width);
    height = static_cast<int>(img.height);
    return buffer;
}

void write_raw(const std::string& path, const std::uint8_t* data, int width, int height, png_uint_32 format) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(width);
    img.height = static_cast<png_uint_32>(height);
    img.format = format;
    if (!png_image_write_to_file(&img, path.c_str(), 0, data, 0, nullptr)) {
        throw Error(std::string("cannot write PNG '") + path + "': " + img.message);
    }
}

}  // namespace

Image read_png(const std::string& path) {
    int w = 0, h = 0;
    const auto rgba = read_rgba(path, w, h);
    Image out(w, h);
    for (std::size_t p = 0; p < static_cast<std::size_t>(w) * h; ++p) {
        out.rgb[3 * p] = rgba[4 * p];
        out.rgb[3 * p + 1] = rgba[4 * p + 1];
        out.rgb[3 * p + 2] = rgba[4 * p + 2];
    }
    return out;
}

void write_png(const std::string& path, const Image& image) {
    write_raw(path, image.rgb.data(), image.width, image.height, PNG_FORMAT_RGB);
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width);
    img.height = static_cast<png_uint_32>(image.height);
    img.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.rgb.data(), 0, nullptr)) {
        throw Error(std::string("cannot encode PNG: ") + img.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.rgb.data(), 0, nullptr)) {
        throw Error(std::string("cannot encode PNG: ") + img.message);
    }
    out.resize(size);
    return out;
}

Patch read_patch_png(const std::string& path) {
    int w = 0, h = 0;
    const auto rgba = read_rgba(path, w, h);
    Patch out(w, h);
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            const std::size_t p = static_cast<std::size_t>(row) * w + col;
            out.set(col, row, {rgba[4 * p], rgba[4 * p + 1], rgba[4 * p + 2]}, rgba[4 * p + 3] != 0);
        }
    }
    return out;
}

void write_patch_png(const std::string& path, const Patch& patch) {
    std::vector<std::uint8_t> rgba(4 * static_cast<std::size_t>(patch.width) * patch.height);
    for (std::size_t p = 0; p < patch.valid.size(); ++p) {
        rgba[4 * p] = patch.rgb[3 * p];
        rgba[4 * p + 1] = patch.rgb[3 * p + 1];
        rgba[4 * p + 2] = patch.rgb[3 * p + 2];
        rgba[4 * p + 3] = patch.valid[p] ? 255 : 0;
    }
    write_raw(path, rgba.data(), patch.width, patch.height, PNG_FORMAT_RGBA);
}

}  // namespace softbio

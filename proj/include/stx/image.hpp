#pragma once

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "stx/error.hpp"
#include "stx/vec.hpp"

namespace stx {

// RGB raster with float channels in [0,1]. Row 0 is the top image row,
// matching PNG layout; texture-space vertical flips happen in texture.hpp.
struct ImageRGB {
    int width = 0;
    int height = 0;
    std::vector<float> data;  // 3 * width * height, row-major

    ImageRGB() = default;
    ImageRGB(int w, int h, Vec3f fill = {0, 0, 0}) : width(w), height(h), data(size_t(3) * w * h) {
        for (int i = 0; i < w * h; ++i) {
            data[3 * i] = fill.x;
            data[3 * i + 1] = fill.y;
            data[3 * i + 2] = fill.z;
        }
    }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    Vec3f at(int x, int y) const {
        size_t i = 3 * (size_t(y) * width + x);
        return {data[i], data[i + 1], data[i + 2]};
    }
    void set(int x, int y, Vec3f c) {
        size_t i = 3 * (size_t(y) * width + x);
        data[i] = c.x;
        data[i + 1] = c.y;
        data[i + 2] = c.z;
    }
};

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline uint8_t to_u8(float v) {
    float c = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
    return uint8_t(c * 255.0f + 0.5f);
}

}  // namespace detail

// Writes 8-bit PNG. channels: rows of interleaved samples, `comps` per pixel
// (1=gray, 3=RGB, 4=RGBA).
inline void save_png_bytes(const std::string& path, int w, int h, int comps,
                           const std::vector<uint8_t>& bytes) {
    if (w <= 0 || h <= 0 || bytes.size() != size_t(w) * h * comps)
        fail_data("save_png: bad dimensions for " + path);
    detail::FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail_data("save_png: cannot open " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail_data("save_png: libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail_data("save_png: write failed for " + path);
    }
    png_init_io(png, f.get());
    int color = comps == 1 ? PNG_COLOR_TYPE_GRAY : (comps == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_RGBA);
    png_set_IHDR(png, info, w, h, 8, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = const_cast<uint8_t*>(bytes.data()) + size_t(y) * w * comps;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

inline void save_png(const std::string& path, const ImageRGB& img) {
    std::vector<uint8_t> bytes(size_t(3) * img.width * img.height);
    for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = detail::to_u8(img.data[i]);
    save_png_bytes(path, img.width, img.height, 3, bytes);
}

// RGBA with alpha from a per-pixel mask (255 = foreground).
inline void save_png_masked(const std::string& path, const ImageRGB& img,
                            const std::vector<uint8_t>& mask) {
    std::vector<uint8_t> bytes(size_t(4) * img.width * img.height);
    for (size_t i = 0; i < size_t(img.width) * img.height; ++i) {
        bytes[4 * i] = detail::to_u8(img.data[3 * i]);
        bytes[4 * i + 1] = detail::to_u8(img.data[3 * i + 1]);
        bytes[4 * i + 2] = detail::to_u8(img.data[3 * i + 2]);
        bytes[4 * i + 3] = mask[i] ? 255 : 0;
    }
    save_png_bytes(path, img.width, img.height, 4, bytes);
}

inline void save_gray_png(const std::string& path, int w, int h, const std::vector<uint8_t>& gray) {
    save_png_bytes(path, w, h, 1, gray);
}

// Loads any 8/16-bit PNG as RGB floats; alpha (if present) is returned via
// out_mask as a 0/255 foreground flag and otherwise ignored.
inline ImageRGB load_png(const std::string& path, std::vector<uint8_t>* out_mask = nullptr) {
    detail::FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail_data("load_png: cannot open " + path);
    png_byte header[8];
    if (std::fread(header, 1, 8, f.get()) != 8 || png_sig_cmp(header, 0, 8))
        fail_data("load_png: not a PNG file: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail_data("load_png: libpng init failed");
    }
    std::vector<uint8_t> raw;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail_data("load_png: corrupt PNG: " + path);
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    int w = int(png_get_image_width(png, info));
    int h = int(png_get_image_height(png, info));
    int comps = int(png_get_channels(png, info));
    raw.resize(size_t(w) * h * comps);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = raw.data() + size_t(y) * w * comps;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImageRGB img(w, h);
    if (out_mask) out_mask->assign(size_t(w) * h, 255);
    for (size_t i = 0; i < size_t(w) * h; ++i) {
        img.data[3 * i] = raw[comps * i] / 255.0f;
        img.data[3 * i + 1] = raw[comps * i + 1] / 255.0f;
        img.data[3 * i + 2] = raw[comps * i + 2] / 255.0f;
        if (comps == 4 && out_mask) (*out_mask)[i] = raw[comps * i + 3] ? 255 : 0;
    }
    return img;
}

}  // namespace stx

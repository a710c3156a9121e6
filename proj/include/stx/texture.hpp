#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stx/binio.hpp"
#include "stx/image.hpp"
#include "stx/vec.hpp"

namespace stx {

// Texture atlas. Texel (i,j) covers UV [i/W,(i+1)/W) x [j/H,(j+1)/H) with v
// up; PNG I/O flips rows so v=1 is the top image row. Unfilled texels hold
// the black sentinel.
struct Texture {
    int width = 0;
    int height = 0;
    std::vector<Vec3f> texels;
    std::vector<uint8_t> filled;

    Texture() = default;
    Texture(int w, int h) : width(w), height(h), texels(size_t(w) * h, Vec3f{0, 0, 0}), filled(size_t(w) * h, 0) {}

    size_t index(int i, int j) const { return size_t(j) * width + i; }
    Vec3f at(int i, int j) const { return texels[index(i, j)]; }
    bool is_filled(int i, int j) const { return filled[index(i, j)] != 0; }

    void set(int i, int j, Vec3f c) {
        texels[index(i, j)] = c;
        filled[index(i, j)] = 1;
    }
    void clear(int i, int j) {
        texels[index(i, j)] = {0, 0, 0};
        filled[index(i, j)] = 0;
    }

    // Nearest-texel lookup; uv clamped into [0,1).
    Vec3f sample_nearest(Vec2d uv, bool* filled_out = nullptr) const {
        int i = std::clamp(int(uv.x * width), 0, width - 1);
        int j = std::clamp(int(uv.y * height), 0, height - 1);
        if (filled_out) *filled_out = is_filled(i, j);
        return at(i, j);
    }

    size_t filled_count() const {
        size_t n = 0;
        for (uint8_t f : filled) n += f != 0;
        return n;
    }
};

inline void save_texture_png(const Texture& t, const std::string& path) {
    ImageRGB img(t.width, t.height);
    for (int j = 0; j < t.height; ++j)
        for (int i = 0; i < t.width; ++i) img.set(i, t.height - 1 - j, t.at(i, j));
    save_png(path, img);
}

inline void save_coverage_png(const Texture& t, const std::string& path) {
    std::vector<uint8_t> gray(size_t(t.width) * t.height);
    for (int j = 0; j < t.height; ++j)
        for (int i = 0; i < t.width; ++i)
            gray[size_t(t.height - 1 - j) * t.width + i] = t.is_filled(i, j) ? 255 : 0;
    save_gray_png(path, t.width, t.height, gray);
}

// Loads a PNG as a texture (all texels filled); used for reference textures.
inline Texture load_texture_png(const std::string& path) {
    ImageRGB img = load_png(path);
    Texture t(img.width, img.height);
    for (int j = 0; j < t.height; ++j)
        for (int i = 0; i < t.width; ++i) t.set(i, j, img.at(i, t.height - 1 - j));
    return t;
}

// Lossless f32 texture for pipelines that must avoid 8-bit quantization.
inline void save_texture_stxt(const Texture& t, const std::string& path) {
    BinWriter w(path);
    w.magic("STXT");
    w.write<uint32_t>(1);
    w.write<uint32_t>(uint32_t(t.width));
    w.write<uint32_t>(uint32_t(t.height));
    for (size_t i = 0; i < t.texels.size(); ++i) {
        float rgb[3] = {t.texels[i].x, t.texels[i].y, t.texels[i].z};
        w.bytes(rgb, sizeof rgb);
        w.write<uint8_t>(t.filled[i]);
    }
    w.close();
}

inline Texture load_texture_stxt(const std::string& path) {
    BinReader r(path);
    r.expect_magic("STXT");
    uint32_t version = r.read<uint32_t>();
    if (version != 1) fail_data(strprintf("%s: unsupported STXT version %u", path.c_str(), version));
    int w = int(r.read<uint32_t>()), h = int(r.read<uint32_t>());
    if (w <= 0 || h <= 0 || size_t(w) * h > (size_t(1) << 28)) fail_data(path + ": implausible texture size");
    Texture t(w, h);
    for (size_t i = 0; i < t.texels.size(); ++i) {
        float rgb[3];
        r.bytes(rgb, sizeof rgb);
        t.texels[i] = {rgb[0], rgb[1], rgb[2]};
        t.filled[i] = r.read<uint8_t>() ? 1 : 0;
        if (!t.filled[i]) t.texels[i] = {0, 0, 0};
    }
    return t;
}

}  // namespace stx

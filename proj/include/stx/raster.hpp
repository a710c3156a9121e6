#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "stx/binio.hpp"
#include "stx/camera.hpp"
#include "stx/image.hpp"
#include "stx/mesh.hpp"
#include "stx/parallel.hpp"
#include "stx/texelmap.hpp"
#include "stx/texture.hpp"

namespace stx {

constexpr double kInfDepth = std::numeric_limits<double>::infinity();

// Per-pixel geometry buffers from one rasterized view.
struct GBuffer {
    int width = 0;
    int height = 0;
    std::vector<double> depth;    // view-space depth, +inf for background
    std::vector<Vec3d> position;
    std::vector<Vec3d> normal;
    std::vector<uint32_t> face;   // kInvalidFace for background
    std::vector<uint8_t> mask;

    GBuffer() = default;
    GBuffer(int w, int h)
        : width(w),
          height(h),
          depth(size_t(w) * h, kInfDepth),
          position(size_t(w) * h),
          normal(size_t(w) * h),
          face(size_t(w) * h, kInvalidFace),
          mask(size_t(w) * h, 0) {}

    size_t index(int x, int y) const { return size_t(y) * width + x; }
    bool foreground(int x, int y) const { return mask[index(x, y)] != 0; }
};

namespace detail {

// A screen-space triangle carrying barycentrics of the ORIGINAL face at each
// corner, so clipped sub-triangles still interpolate exact face coordinates.
struct RasterTri {
    uint32_t face;
    Vec2d pix[3];
    double depth[3];
    Vec3d bary[3];
};

// Boundary ownership in y-down pixel space: edges going up own their
// boundary pixels, horizontal edges own them when running in -x. Together
// with positive orientation this covers shared edges exactly once.
inline bool edge_owns_boundary_ydown(const Vec2d& a, const Vec2d& b) {
    return (b.y < a.y) || (b.y == a.y && b.x < a.x);
}

inline void emit_clipped(const Camera& cam, uint32_t face, const std::vector<Vec3d>& barys,
                         const Mesh& mesh, std::vector<RasterTri>& out) {
    // Fan-triangulate the clipped polygon.
    for (size_t i = 1; i + 1 < barys.size(); ++i) {
        RasterTri t;
        t.face = face;
        Vec3d bs[3] = {barys[0], barys[i], barys[i + 1]};
        bool ok = true;
        for (int k = 0; k < 3; ++k) {
            auto pr = project(cam, mesh.face_point(face, bs[k]));
            if (!pr) {
                ok = false;
                break;
            }
            t.pix[k] = pr->pixel;
            t.depth[k] = pr->depth;
            t.bary[k] = bs[k];
        }
        if (ok) out.push_back(t);
    }
}

inline std::vector<RasterTri> setup_triangles(const Mesh& mesh, const Camera& cam) {
    std::vector<RasterTri> tris;
    tris.reserve(mesh.faces.size());
    const Vec3d fwd = cam.forward();
    const Vec3d corner_bary[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (uint32_t f = 0; f < mesh.faces.size(); ++f) {
        double d[3];
        for (int k = 0; k < 3; ++k) d[k] = dot(mesh.vertices[mesh.faces[f][k]] - cam.position, fwd);
        int behind = (d[0] < cam.near) + (d[1] < cam.near) + (d[2] < cam.near);
        if (behind == 0) {
            emit_clipped(cam, f, {corner_bary[0], corner_bary[1], corner_bary[2]}, mesh, tris);
            continue;
        }
        if (behind == 3) continue;
        // Clip against the near plane in depth space; depth is affine in
        // barycentrics over a planar face, so lerped corners land exactly on it.
        std::vector<Vec3d> poly;
        for (int k = 0; k < 3; ++k) {
            int k2 = (k + 1) % 3;
            bool in1 = d[k] >= cam.near, in2 = d[k2] >= cam.near;
            if (in1) poly.push_back(corner_bary[k]);
            if (in1 != in2) {
                double t = (cam.near - d[k]) / (d[k2] - d[k]);
                poly.push_back(lerp(corner_bary[k], corner_bary[k2], t));
            }
        }
        if (poly.size() >= 3) emit_clipped(cam, f, poly, mesh, tris);
    }
    return tris;
}

// Scans triangles over rows [y0,y1); fn(x, y, face, bary, depth) is invoked
// for every covered pixel (callers z-test). Iteration order is triangle-then-
// row-then-column, so single-band scans are deterministic.
template <typename Fn>
void scan_triangles(const std::vector<RasterTri>& tris, int width, int y0, int y1, Fn&& fn) {
    for (const auto& t : tris) {
        Vec2d p0 = t.pix[0], p1 = t.pix[1], p2 = t.pix[2];
        double z0 = t.depth[0], z1 = t.depth[1], z2 = t.depth[2];
        Vec3d b0 = t.bary[0], b1 = t.bary[1], b2 = t.bary[2];
        double area2 = cross(p1 - p0, p2 - p0);
        if (area2 == 0.0) continue;
        if (area2 < 0) {
            std::swap(p1, p2);
            std::swap(z1, z2);
            std::swap(b1, b2);
            area2 = -area2;
        }
        int min_x = std::max(0, int(std::floor(std::min({p0.x, p1.x, p2.x}) - 0.5)));
        int max_x = std::min(width - 1, int(std::ceil(std::max({p0.x, p1.x, p2.x}))));
        int min_y = std::max(y0, int(std::floor(std::min({p0.y, p1.y, p2.y}) - 0.5)));
        int max_y = std::min(y1 - 1, int(std::ceil(std::max({p0.y, p1.y, p2.y}))));
        if (min_x > max_x || min_y > max_y) continue;

        bool own01 = edge_owns_boundary_ydown(p0, p1);
        bool own12 = edge_owns_boundary_ydown(p1, p2);
        bool own20 = edge_owns_boundary_ydown(p2, p0);
        double inv_z0 = 1.0 / z0, inv_z1 = 1.0 / z1, inv_z2 = 1.0 / z2;

        for (int y = min_y; y <= max_y; ++y) {
            for (int x = min_x; x <= max_x; ++x) {
                Vec2d c{x + 0.5, y + 0.5};
                double e01 = cross(p1 - p0, c - p0);
                double e12 = cross(p2 - p1, c - p1);
                double e20 = cross(p0 - p2, c - p2);
                bool inside = (e01 > 0 || (e01 == 0 && own01)) && (e12 > 0 || (e12 == 0 && own12)) &&
                              (e20 > 0 || (e20 == 0 && own20));
                if (!inside) continue;
                double w0 = e12 / area2, w1 = e20 / area2, w2 = e01 / area2;
                // Perspective-correct interpolation via 1/z weights.
                double q0 = w0 * inv_z0, q1 = w1 * inv_z1, q2 = w2 * inv_z2;
                double qs = q0 + q1 + q2;
                double depth = 1.0 / qs;
                Vec3d bary = (b0 * q0 + b1 * q1 + b2 * q2) / qs;
                fn(x, y, t.face, bary, depth);
            }
        }
    }
}

}  // namespace detail

// Z-buffered G-buffer rasterization. Parallelizes over row bands; each band
// scans all triangles, so output is independent of the worker count.
inline GBuffer render_gbuffer(const Mesh& mesh, const Camera& cam, int workers = 1) {
    cam.validate();
    if (!mesh.has_normals()) fail_data("render_gbuffer: mesh has no normals");
    GBuffer gb(cam.width, cam.height);
    auto tris = detail::setup_triangles(mesh, cam);
    int bands = workers <= 1 ? 1 : workers * 4;
    int rows_per_band = (cam.height + bands - 1) / bands;
    parallel_for(size_t(bands), workers, [&](size_t band) {
        int y0 = int(band) * rows_per_band;
        int y1 = std::min(cam.height, y0 + rows_per_band);
        if (y0 >= y1) return;
        detail::scan_triangles(tris, cam.width, y0, y1,
                               [&](int x, int y, uint32_t face, const Vec3d& bary, double depth) {
                                   size_t i = gb.index(x, y);
                                   if (depth >= gb.depth[i]) return;
                                   gb.depth[i] = depth;
                                   gb.position[i] = mesh.face_point(face, bary);
                                   gb.normal[i] = mesh.face_normal_interp(face, bary);
                                   gb.face[i] = face;
                                   gb.mask[i] = 1;
                               });
    });
    return gb;
}

struct RenderStats {
    size_t invalid_texel_pixels = 0;
};

// Unlit albedo render: per-pixel UV via perspective-correct barycentrics,
// nearest-texel lookup. Pixels whose UV lands on an unfilled texel get the
// magenta debug color and are counted in stats.
inline ImageRGB render_textured(const Mesh& mesh, const Texture& texture, const Camera& cam,
                                RenderStats* stats = nullptr, std::vector<uint8_t>* mask_out = nullptr,
                                int workers = 1) {
    cam.validate();
    ImageRGB img(cam.width, cam.height, {0, 0, 0});
    std::vector<double> zbuf(size_t(cam.width) * cam.height, kInfDepth);
    if (mask_out) mask_out->assign(zbuf.size(), 0);
    std::vector<uint8_t> bad(zbuf.size(), 0);
    auto tris = detail::setup_triangles(mesh, cam);
    int bands = workers <= 1 ? 1 : workers * 4;
    int rows_per_band = (cam.height + bands - 1) / bands;
    parallel_for(size_t(bands), workers, [&](size_t band) {
        int y0 = int(band) * rows_per_band;
        int y1 = std::min(cam.height, y0 + rows_per_band);
        if (y0 >= y1) return;
        detail::scan_triangles(tris, cam.width, y0, y1,
                               [&](int x, int y, uint32_t face, const Vec3d& bary, double depth) {
                                   size_t i = size_t(y) * cam.width + x;
                                   if (depth >= zbuf[i]) return;
                                   zbuf[i] = depth;
                                   const auto& uvs = mesh.face_uv_indices[face];
                                   Vec2d uv = mesh.uv_coords[uvs[0]] * bary.x + mesh.uv_coords[uvs[1]] * bary.y +
                                              mesh.uv_coords[uvs[2]] * bary.z;
                                   bool filled = false;
                                   Vec3f c = texture.sample_nearest(uv, &filled);
                                   if (!filled) {
                                       c = {1, 0, 1};
                                       bad[i] = 1;
                                   } else {
                                       bad[i] = 0;
                                   }
                                   img.set(x, y, c);
                                   if (mask_out) (*mask_out)[i] = 1;
                               });
    });
    if (stats) {
        stats->invalid_texel_pixels = 0;
        for (uint8_t b : bad) stats->invalid_texel_pixels += b;
    }
    return img;
}

// --- G-buffer export -------------------------------------------------------

inline void save_gbuffer(const GBuffer& gb, const std::string& path) {
    BinWriter w(path);
    w.magic("STXG");
    w.write<uint32_t>(1);
    w.write<uint32_t>(uint32_t(gb.width));
    w.write<uint32_t>(uint32_t(gb.height));
    for (size_t i = 0; i < gb.depth.size(); ++i) {
        w.write<float>(float(gb.depth[i]));
        float v[6] = {float(gb.position[i].x), float(gb.position[i].y), float(gb.position[i].z),
                      float(gb.normal[i].x), float(gb.normal[i].y), float(gb.normal[i].z)};
        w.bytes(v, sizeof v);
        w.write<uint32_t>(gb.face[i]);
        w.write<uint8_t>(gb.mask[i]);
    }
    w.close();
}

inline GBuffer load_gbuffer(const std::string& path) {
    BinReader r(path);
    r.expect_magic("STXG");
    uint32_t version = r.read<uint32_t>();
    if (version != 1) fail_data(strprintf("%s: unsupported STXG version %u", path.c_str(), version));
    int w = int(r.read<uint32_t>()), h = int(r.read<uint32_t>());
    if (w <= 0 || h <= 0 || size_t(w) * h > (size_t(1) << 28)) fail_data(path + ": implausible G-buffer size");
    GBuffer gb(w, h);
    for (size_t i = 0; i < gb.depth.size(); ++i) {
        gb.depth[i] = r.read<float>();
        float v[6];
        r.bytes(v, sizeof v);
        gb.position[i] = {v[0], v[1], v[2]};
        gb.normal[i] = {v[3], v[4], v[5]};
        gb.face[i] = r.read<uint32_t>();
        gb.mask[i] = r.read<uint8_t>();
    }
    return gb;
}

// Depth visualization: [near,far] remapped linearly to [255,0]; background 0.
inline void save_depth_png(const GBuffer& gb, const Camera& cam, const std::string& path) {
    std::vector<uint8_t> gray(gb.depth.size(), 0);
    for (size_t i = 0; i < gb.depth.size(); ++i) {
        if (!gb.mask[i]) continue;
        double t = (gb.depth[i] - cam.near) / (cam.far - cam.near);
        t = std::clamp(t, 0.0, 1.0);
        gray[i] = uint8_t(std::lround(255.0 * (1.0 - t)));
    }
    save_gray_png(path, gb.width, gb.height, gray);
}

}  // namespace stx

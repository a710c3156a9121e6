#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stx/mesh.hpp"
#include "stx/rng.hpp"
#include "stx/texelmap.hpp"
#include "stx/texture.hpp"

namespace stx {

// --- Procedural test/training meshes ----------------------------------------
// All primitives come out roughly unit-sized around the origin; callers still
// run normalize_mesh + compute_normals for the standard pipeline framing.

// Unit-square grid in the z=0 plane, n cells per side, UV = (x, y). Cell
// diagonals run lower-left to upper-right.
inline Mesh make_grid(int n) {
    Mesh m;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            m.vertices.push_back({double(i) / n, double(j) / n, 0.0});
            m.uv_coords.push_back({double(i) / n, double(j) / n});
        }
    auto vid = [&](int i, int j) { return uint32_t(j * (n + 1) + i); };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            uint32_t a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            m.faces.push_back({a, b, c});
            m.face_uv_indices.push_back({a, b, c});
            m.faces.push_back({a, c, d});
            m.face_uv_indices.push_back({a, c, d});
        }
    return m;
}

// Icosphere via recursive midpoint subdivision, radius 0.5, poles at +-y.
// No UV atlas: this is a geodesics fixture.
inline Mesh make_icosphere(int level) {
    Mesh m;
    double lat = std::atan(0.5);
    m.vertices.push_back({0, 0.5, 0});
    for (int i = 0; i < 5; ++i) {
        double lon = 2 * 3.14159265358979323846 * i / 5.0;
        m.vertices.push_back({0.5 * std::cos(lat) * std::sin(lon), 0.5 * std::sin(lat),
                              0.5 * std::cos(lat) * std::cos(lon)});
    }
    for (int i = 0; i < 5; ++i) {
        double lon = 2 * 3.14159265358979323846 * (i + 0.5) / 5.0;
        m.vertices.push_back({0.5 * std::cos(lat) * std::sin(lon), -0.5 * std::sin(lat),
                              0.5 * std::cos(lat) * std::cos(lon)});
    }
    m.vertices.push_back({0, -0.5, 0});
    auto u = [](int i) { return uint32_t(1 + i); };
    auto l = [](int i) { return uint32_t(6 + i); };
    for (int i = 0; i < 5; ++i) {
        int i2 = (i + 1) % 5;
        m.faces.push_back({0, u(i), u(i2)});
        m.faces.push_back({u(i), l(i), u(i2)});
        m.faces.push_back({u(i2), l(i), l(i2)});
        m.faces.push_back({l(i), 11, l(i2)});
    }
    for (int s = 0; s < level; ++s) {
        std::map<std::pair<uint32_t, uint32_t>, uint32_t> midpoints;
        auto midpoint = [&](uint32_t a, uint32_t b) {
            auto key = std::minmax(a, b);
            auto it = midpoints.find({key.first, key.second});
            if (it != midpoints.end()) return it->second;
            Vec3d p = normalized((m.vertices[a] + m.vertices[b]) * 0.5) * 0.5;
            uint32_t id = uint32_t(m.vertices.size());
            m.vertices.push_back(p);
            midpoints[{key.first, key.second}] = id;
            return id;
        };
        std::vector<std::array<uint32_t, 3>> next;
        next.reserve(m.faces.size() * 4);
        for (const auto& f : m.faces) {
            uint32_t ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    return m;
}

namespace detail {

// Lat-long style parameterization shared by the sphere and capsule: rows of
// shared 3D vertices (seam positions shared, UVs duplicated), pole fans.
// profile(v) returns {ring radius, height} for v in [0,1].
template <typename Profile>
Mesh make_revolved(int seg_u, int seg_v, Profile&& profile) {
    Mesh m;
    // 3D vertices: bottom pole, rings j=1..seg_v-1 of seg_u vertices, top pole.
    auto prof0 = profile(0.0), prof1 = profile(1.0);
    m.vertices.push_back({0, prof0.second, 0});
    for (int j = 1; j < seg_v; ++j) {
        auto pr = profile(double(j) / seg_v);
        for (int i = 0; i < seg_u; ++i) {
            double a = 2 * 3.14159265358979323846 * i / seg_u;
            m.vertices.push_back({pr.first * std::sin(a), pr.second, pr.first * std::cos(a)});
        }
    }
    m.vertices.push_back({0, prof1.second, 0});
    uint32_t top = uint32_t(m.vertices.size() - 1);

    // UV grid incl. the duplicated seam column i == seg_u.
    for (int j = 0; j <= seg_v; ++j)
        for (int i = 0; i <= seg_u; ++i)
            m.uv_coords.push_back({double(i) / seg_u, double(j) / seg_v});
    auto vid = [&](int i, int j) { return uint32_t(1 + (j - 1) * seg_u + (i % seg_u)); };
    auto tid = [&](int i, int j) { return uint32_t(j * (seg_u + 1) + i); };

    for (int i = 0; i < seg_u; ++i) {  // bottom fan
        m.faces.push_back({0, vid(i + 1, 1), vid(i, 1)});
        m.face_uv_indices.push_back({tid(i, 0), tid(i + 1, 1), tid(i, 1)});
    }
    for (int j = 1; j < seg_v - 1; ++j)
        for (int i = 0; i < seg_u; ++i) {
            uint32_t a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            uint32_t ta = tid(i, j), tb = tid(i + 1, j), tc = tid(i + 1, j + 1), td = tid(i, j + 1);
            m.faces.push_back({a, b, c});
            m.face_uv_indices.push_back({ta, tb, tc});
            m.faces.push_back({a, c, d});
            m.face_uv_indices.push_back({ta, tc, td});
        }
    for (int i = 0; i < seg_u; ++i) {  // top fan
        m.faces.push_back({top, vid(i, seg_v - 1), vid(i + 1, seg_v - 1)});
        m.face_uv_indices.push_back({tid(i, seg_v), tid(i, seg_v - 1), tid(i + 1, seg_v - 1)});
    }
    return m;
}

}  // namespace detail

inline Mesh make_uv_sphere(int seg_u = 48, int seg_v = 32) {
    return detail::make_revolved(seg_u, seg_v, [](double v) {
        double polar = 3.14159265358979323846 * v;
        return std::pair<double, double>{0.5 * std::sin(polar), -0.5 * std::cos(polar)};
    });
}

inline Mesh make_capsule(int seg_u = 48, int seg_v = 36, double cap_r = 0.25) {
    double cyl_h = 1.0 - 2 * cap_r;
    return detail::make_revolved(seg_u, seg_v, [=](double v) {
        // v in [0,1]: bottom cap, straight side, top cap, by arclength thirds.
        const double pi = 3.14159265358979323846;
        if (v < 1.0 / 3) {
            double a = v * 3 * pi / 2;  // 0..pi/2
            return std::pair<double, double>{cap_r * std::sin(a), -0.5 + cap_r * (1 - std::cos(a))};
        }
        if (v > 2.0 / 3) {
            double a = (v - 2.0 / 3) * 3 * pi / 2;
            return std::pair<double, double>{cap_r * std::cos(a), 0.5 - cap_r * (1 - std::sin(a))};
        }
        return std::pair<double, double>{cap_r, -0.5 + cap_r + (v - 1.0 / 3) * 3 * cyl_h};
    });
}

// Torus around the y axis; single rectangular chart (two UV cuts).
inline Mesh make_torus(int seg_major = 48, int seg_minor = 24, double major_r = 0.35, double minor_r = 0.14) {
    Mesh m;
    const double pi = 3.14159265358979323846;
    for (int j = 0; j < seg_minor; ++j)
        for (int i = 0; i < seg_major; ++i) {
            double a = 2 * pi * i / seg_major;   // around the axis
            double b = 2 * pi * j / seg_minor;   // around the tube
            double rr = major_r + minor_r * std::cos(b);
            m.vertices.push_back({rr * std::sin(a), minor_r * std::sin(b), rr * std::cos(a)});
        }
    for (int j = 0; j <= seg_minor; ++j)
        for (int i = 0; i <= seg_major; ++i)
            m.uv_coords.push_back({double(i) / seg_major, double(j) / seg_minor});
    auto vid = [&](int i, int j) { return uint32_t((j % seg_minor) * seg_major + (i % seg_major)); };
    auto tid = [&](int i, int j) { return uint32_t(j * (seg_major + 1) + i); };
    for (int j = 0; j < seg_minor; ++j)
        for (int i = 0; i < seg_major; ++i) {
            uint32_t a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            uint32_t ta = tid(i, j), tb = tid(i + 1, j), tc = tid(i + 1, j + 1), td = tid(i, j + 1);
            m.faces.push_back({a, b, c});
            m.face_uv_indices.push_back({ta, tb, tc});
            m.faces.push_back({a, c, d});
            m.face_uv_indices.push_back({ta, tc, td});
        }
    return m;
}

// Axis-aligned cube with shared corner vertices and six separate UV charts in
// a padded 3x2 layout; every cube edge is a UV cut.
inline Mesh make_cube() {
    Mesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({(i & 1) ? 0.5 : -0.5, (i & 2) ? 0.5 : -0.5, (i & 4) ? 0.5 : -0.5});
    // Quads: +x, -x, +y, -y, +z, -z with outward winding.
    const std::array<std::array<uint32_t, 4>, 6> quads = {{{1, 3, 7, 5},
                                                           {0, 4, 6, 2},
                                                           {2, 6, 7, 3},
                                                           {0, 1, 5, 4},
                                                           {4, 5, 7, 6},
                                                           {0, 2, 3, 1}}};
    const double pad = 0.03;
    for (int q = 0; q < 6; ++q) {
        int cx = q % 3, cy = q / 3;
        double u0 = cx / 3.0 + pad, u1 = (cx + 1) / 3.0 - pad;
        double v0 = cy / 2.0 + pad, v1 = (cy + 1) / 2.0 - pad;
        uint32_t base = uint32_t(m.uv_coords.size());
        m.uv_coords.push_back({u0, v0});
        m.uv_coords.push_back({u1, v0});
        m.uv_coords.push_back({u1, v1});
        m.uv_coords.push_back({u0, v1});
        const auto& quad = quads[size_t(q)];
        m.faces.push_back({quad[0], quad[1], quad[2]});
        m.face_uv_indices.push_back({base, base + 1, base + 2});
        m.faces.push_back({quad[0], quad[2], quad[3]});
        m.face_uv_indices.push_back({base, base + 2, base + 3});
    }
    return m;
}

// --- Procedural texture patterns ---------------------------------------------
// Patterns are functions of the 3D surface point, so the painted target is
// continuous across UV chart boundaries; UV seams in a ground-truth texture
// then carry no color jumps.

enum class Pattern { checker, stripes, noise, gradient };

inline const char* pattern_name(Pattern p) {
    switch (p) {
        case Pattern::checker: return "checker";
        case Pattern::stripes: return "stripes";
        case Pattern::noise: return "noise";
        case Pattern::gradient: return "gradient";
    }
    return "?";
}

inline Pattern pattern_from_name(const std::string& s) {
    if (s == "checker") return Pattern::checker;
    if (s == "stripes") return Pattern::stripes;
    if (s == "noise") return Pattern::noise;
    if (s == "gradient") return Pattern::gradient;
    fail_usage("unknown pattern: " + s);
}

namespace detail {

struct PatternParams {
    Vec3d color_a, color_b;
    Vec3d dir;
    double freq;
    double phase[6];
    Vec3d noise_dir[4];
    double noise_freq[4];
    double noise_phase[4];
};

inline PatternParams make_pattern_params(uint64_t seed) {
    Rng rng(derive_seed(seed, "pattern"));
    PatternParams p;
    auto color = [&] { return Vec3d{0.15 + 0.7 * rng.uniform(), 0.15 + 0.7 * rng.uniform(), 0.15 + 0.7 * rng.uniform()}; };
    p.color_a = color();
    p.color_b = color();
    // Keep contrasting pattern colors apart so checks on strategy blending
    // have signal to work with.
    if (norm(p.color_a - p.color_b) < 0.4) {
        p.color_b = Vec3d{1, 1, 1} - p.color_a;
    }
    Vec3d d{rng.normal(), rng.normal(), rng.normal()};
    p.dir = norm(d) > 1e-9 ? normalized(d) : Vec3d{1, 0, 0};
    p.freq = 2.0 + 2.0 * rng.uniform();
    for (double& ph : p.phase) ph = rng.uniform(0.0, 6.2831853);
    for (int i = 0; i < 4; ++i) {
        Vec3d nd{rng.normal(), rng.normal(), rng.normal()};
        p.noise_dir[i] = norm(nd) > 1e-9 ? normalized(nd) : Vec3d{0, 1, 0};
        p.noise_freq[i] = 1.5 + 3.0 * rng.uniform();
        p.noise_phase[i] = rng.uniform(0.0, 6.2831853);
    }
    return p;
}

inline Vec3d eval_pattern(Pattern pattern, const PatternParams& p, const Vec3d& pos) {
    const double two_pi = 6.2831853071795864769;
    switch (pattern) {
        case Pattern::checker: {
            int parity = (int(std::floor((pos.x + 0.5) * p.freq)) + int(std::floor((pos.y + 0.5) * p.freq)) +
                          int(std::floor((pos.z + 0.5) * p.freq))) & 1;
            return parity ? p.color_a : p.color_b;
        }
        case Pattern::stripes: {
            double s = std::sin(two_pi * p.freq * dot(p.dir, pos) + p.phase[0]);
            return s > 0 ? p.color_a : p.color_b;
        }
        case Pattern::noise: {
            Vec3d c = (p.color_a + p.color_b) * 0.5;
            Vec3d out = c;
            for (int i = 0; i < 4; ++i) {
                double v = std::sin(two_pi * p.noise_freq[i] * dot(p.noise_dir[i], pos) + p.noise_phase[i]);
                Vec3d amp = (p.color_a - p.color_b) * 0.18;
                out += amp * v * ((i % 2) ? -1.0 : 1.0);
            }
            return clamped01(out);
        }
        case Pattern::gradient: {
            double t = std::clamp(dot(p.dir, pos) + 0.5, 0.0, 1.0);
            // Slope bounded so adjacent texels differ below the 8-bit floor.
            Vec3d delta = (p.color_b - p.color_a) * 0.7;
            return clamped01(p.color_a + delta * t);
        }
    }
    return {0, 0, 0};
}

}  // namespace detail

// Paints each valid texel from its 3D surface point; invalid texels stay empty.
inline Texture paint_texture(const TexelMap& map, Pattern pattern, uint64_t seed) {
    detail::PatternParams params = detail::make_pattern_params(seed);
    Texture t(map.width, map.height);
    for (int j = 0; j < map.height; ++j)
        for (int i = 0; i < map.width; ++i) {
            const TexelEntry& e = map.at(i, j);
            if (!e.valid) continue;
            t.set(i, j, to_f(detail::eval_pattern(pattern, params, e.position)));
        }
    return t;
}

}  // namespace stx

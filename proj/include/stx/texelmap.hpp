#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "stx/binio.hpp"
#include "stx/mesh.hpp"

namespace stx {

constexpr uint32_t kInvalidFace = 0xffffffffu;

// Per-texel inverse-UV record: which surface point each texel textures.
struct TexelEntry {
    bool valid = false;
    uint32_t face = kInvalidFace;
    Vec3d bary{0, 0, 0};
    Vec3d position{0, 0, 0};
    Vec3d normal{0, 0, 0};
};

struct TexelMap {
    int width = 0;
    int height = 0;
    std::vector<TexelEntry> entries;  // row-major, row j = v index

    const TexelEntry& at(int i, int j) const { return entries[size_t(j) * width + i]; }
    TexelEntry& at(int i, int j) { return entries[size_t(j) * width + i]; }

    // Texel centers follow the half-texel convention.
    Vec2d texel_center_uv(int i, int j) const {
        return {(i + 0.5) / width, (j + 0.5) / height};
    }

    size_t valid_count() const {
        size_t n = 0;
        for (const auto& e : entries) n += e.valid;
        return n;
    }
};

struct AtlasReport {
    int chart_count = 0;
    size_t overlap_texel_count = 0;
    bool multi_face_uv_reuse = false;
    std::vector<double> chart_coverage;  // valid-texel fraction of the atlas per chart
};

// UV charts: connected components of faces glued along edges whose UV corners
// coincide on both sides. Returns a per-face chart id.
inline std::vector<uint32_t> compute_uv_charts(const Mesh& mesh, int* chart_count_out = nullptr) {
    size_t n = mesh.faces.size();
    std::vector<uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](uint32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    auto unite = [&](uint32_t a, uint32_t b) { parent[find(a)] = find(b); };

    // Map each directed mesh edge to (face, uv corners at its endpoints).
    struct EdgeUse {
        uint32_t face;
        Vec2d uv_a, uv_b;
    };
    std::map<std::pair<uint32_t, uint32_t>, std::vector<EdgeUse>> edges;
    for (size_t f = 0; f < n; ++f)
        for (int k = 0; k < 3; ++k) {
            uint32_t va = mesh.faces[f][k], vb = mesh.faces[f][(k + 1) % 3];
            Vec2d ua = mesh.uv_coords[mesh.face_uv_indices[f][k]];
            Vec2d ub = mesh.uv_coords[mesh.face_uv_indices[f][(k + 1) % 3]];
            if (va > vb) {
                std::swap(va, vb);
                std::swap(ua, ub);
            }
            edges[{va, vb}].push_back({uint32_t(f), ua, ub});
        }
    constexpr double kUvEps = 1e-9;
    auto same_uv = [&](const Vec2d& a, const Vec2d& b) {
        return std::abs(a.x - b.x) < kUvEps && std::abs(a.y - b.y) < kUvEps;
    };
    for (const auto& [e, uses] : edges)
        for (size_t i = 0; i + 1 < uses.size(); ++i)
            for (size_t j = i + 1; j < uses.size(); ++j)
                if (same_uv(uses[i].uv_a, uses[j].uv_a) && same_uv(uses[i].uv_b, uses[j].uv_b))
                    unite(uses[i].face, uses[j].face);

    std::vector<uint32_t> chart(n);
    std::map<uint32_t, uint32_t> remap;
    for (size_t f = 0; f < n; ++f) {
        uint32_t root = find(uint32_t(f));
        chart[f] = remap.try_emplace(root, uint32_t(remap.size())).first->second;
    }
    if (chart_count_out) *chart_count_out = int(remap.size());
    return chart;
}

namespace detail {

// Tie rule for texel centers exactly on a UV edge: with v up and the triangle
// oriented positively, an edge owns its boundary texels iff it ascends in v,
// or is horizontal and runs in -u. This assigns shared edges to exactly one
// face (the v-up equivalent of the raster top-left rule).
inline bool uv_edge_owns_boundary(const Vec2d& a, const Vec2d& b) {
    return (b.y > a.y) || (b.y == a.y && b.x < a.x);
}

}  // namespace detail

// Rasterizes the UV atlas into a per-texel inverse map. Overlapping charts
// resolve last-writer-wins in face-index order; every overwrite of an
// already-valid texel increments the overlap count.
inline TexelMap build_texel_map(const Mesh& mesh, int width, int height, AtlasReport* report = nullptr) {
    if (width < 1 || height < 1) fail_usage("build_texel_map: width and height must be >= 1");
    if (!mesh.has_normals()) fail_data("build_texel_map: mesh has no normals (run compute_normals)");
    validate_mesh(mesh);

    TexelMap map;
    map.width = width;
    map.height = height;
    map.entries.assign(size_t(width) * height, TexelEntry{});
    size_t overlaps = 0;

    for (uint32_t f = 0; f < mesh.faces.size(); ++f) {
        // Work in texel units so centers sit at half-integers.
        Vec2d uv[3];
        for (int k = 0; k < 3; ++k) {
            Vec2d t = mesh.uv_coords[mesh.face_uv_indices[f][k]];
            uv[k] = {t.x * width, t.y * height};
        }
        double area2 = cross(uv[1] - uv[0], uv[2] - uv[0]);
        if (area2 == 0.0) continue;  // degenerate in UV space
        // Orient positively, remembering the corner permutation for barycentrics.
        int i0 = 0, i1 = 1, i2 = 2;
        if (area2 < 0) {
            std::swap(i1, i2);
            area2 = -area2;
        }
        const Vec2d p0 = uv[i0], p1 = uv[i1], p2 = uv[i2];

        int min_x = std::max(0, int(std::floor(std::min({p0.x, p1.x, p2.x}) - 0.5)));
        int max_x = std::min(width - 1, int(std::ceil(std::max({p0.x, p1.x, p2.x}))));
        int min_y = std::max(0, int(std::floor(std::min({p0.y, p1.y, p2.y}) - 0.5)));
        int max_y = std::min(height - 1, int(std::ceil(std::max({p0.y, p1.y, p2.y}))));

        bool own01 = detail::uv_edge_owns_boundary(p0, p1);
        bool own12 = detail::uv_edge_owns_boundary(p1, p2);
        bool own20 = detail::uv_edge_owns_boundary(p2, p0);

        for (int j = min_y; j <= max_y; ++j) {
            for (int i = min_x; i <= max_x; ++i) {
                Vec2d c{i + 0.5, j + 0.5};
                double e01 = cross(p1 - p0, c - p0);
                double e12 = cross(p2 - p1, c - p1);
                double e20 = cross(p0 - p2, c - p2);
                bool inside = (e01 > 0 || (e01 == 0 && own01)) && (e12 > 0 || (e12 == 0 && own12)) &&
                              (e20 > 0 || (e20 == 0 && own20));
                if (!inside) continue;
                // Barycentric weights in oriented corner order, then unpermute.
                double b1 = e20 / area2, b2 = e01 / area2, b0 = e12 / area2;
                Vec3d bary;
                double bs[3];
                bs[i0] = b0;
                bs[i1] = b1;
                bs[i2] = b2;
                bary = {bs[0], bs[1], bs[2]};

                TexelEntry& e = map.at(i, j);
                if (e.valid) ++overlaps;
                e.valid = true;
                e.face = f;
                e.bary = bary;
                e.position = mesh.face_point(f, bary);
                e.normal = mesh.face_normal_interp(f, bary);
            }
        }
    }

    if (report) {
        int chart_count = 0;
        std::vector<uint32_t> chart = compute_uv_charts(mesh, &chart_count);
        report->chart_count = chart_count;
        report->overlap_texel_count = overlaps;
        report->chart_coverage.assign(chart_count, 0.0);
        for (const auto& e : map.entries)
            if (e.valid) report->chart_coverage[chart[e.face]] += 1.0;
        for (auto& c : report->chart_coverage) c /= double(width) * height;
        // UV reuse: the same unordered UV-index triple referenced by different faces.
        std::map<std::array<uint32_t, 3>, uint32_t> seen;
        report->multi_face_uv_reuse = false;
        for (uint32_t f = 0; f < mesh.faces.size(); ++f) {
            std::array<uint32_t, 3> key = mesh.face_uv_indices[f];
            std::sort(key.begin(), key.end());
            auto [it, inserted] = seen.try_emplace(key, f);
            if (!inserted) report->multi_face_uv_reuse = true;
        }
    }
    return map;
}

// Per-texel chart ids for a built map (kInvalidFace-like sentinel 0xffffffff
// for invalid texels).
inline std::vector<uint32_t> texel_chart_ids(const Mesh& mesh, const TexelMap& map) {
    std::vector<uint32_t> face_chart = compute_uv_charts(mesh);
    std::vector<uint32_t> out(map.entries.size(), 0xffffffffu);
    for (size_t t = 0; t < map.entries.size(); ++t)
        if (map.entries[t].valid) out[t] = face_chart[map.entries[t].face];
    return out;
}

inline void save_texel_map(const TexelMap& map, const std::string& path) {
    BinWriter w(path);
    w.magic("STXM");
    w.write<uint32_t>(1);
    w.write<uint32_t>(uint32_t(map.width));
    w.write<uint32_t>(uint32_t(map.height));
    for (const auto& e : map.entries) {
        w.write<uint8_t>(e.valid ? 1 : 0);
        w.write<uint32_t>(e.face);
        float vals[9] = {float(e.bary.x), float(e.bary.y), float(e.bary.z),
                         float(e.position.x), float(e.position.y), float(e.position.z),
                         float(e.normal.x), float(e.normal.y), float(e.normal.z)};
        w.bytes(vals, sizeof vals);
    }
    w.close();
}

inline TexelMap load_texel_map(const std::string& path) {
    BinReader r(path);
    r.expect_magic("STXM");
    uint32_t version = r.read<uint32_t>();
    if (version != 1) fail_data(strprintf("%s: unsupported STXM version %u", path.c_str(), version));
    TexelMap map;
    map.width = int(r.read<uint32_t>());
    map.height = int(r.read<uint32_t>());
    if (map.width <= 0 || map.height <= 0 || size_t(map.width) * map.height > (size_t(1) << 28))
        fail_data(path + ": implausible texel map dimensions");
    map.entries.resize(size_t(map.width) * map.height);
    for (auto& e : map.entries) {
        e.valid = r.read<uint8_t>() != 0;
        e.face = r.read<uint32_t>();
        float vals[9];
        r.bytes(vals, sizeof vals);
        e.bary = {vals[0], vals[1], vals[2]};
        e.position = {vals[3], vals[4], vals[5]};
        e.normal = {vals[6], vals[7], vals[8]};
    }
    return map;
}

}  // namespace stx

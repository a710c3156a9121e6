#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "stx/mesh.hpp"
#include "stx/texelmap.hpp"
#include "stx/texture.hpp"

namespace stx {

enum class MaskMode { covered, all };

// Mean absolute channel difference. `covered` compares texels filled in both
// textures; `all` compares everywhere the target is filled (missing
// prediction texels count with the black sentinel).
inline double l1_texture_error(const Texture& pred, const Texture& target, MaskMode mode = MaskMode::covered) {
    if (pred.width != target.width || pred.height != target.height)
        fail_data("l1_texture_error: dimension mismatch");
    double acc = 0;
    size_t n = 0;
    for (size_t t = 0; t < pred.texels.size(); ++t) {
        if (!target.filled[t]) continue;
        if (mode == MaskMode::covered && !pred.filled[t]) continue;
        Vec3f d = pred.texels[t] - target.texels[t];
        acc += (std::abs(d.x) + std::abs(d.y) + std::abs(d.z)) / 3.0;
        ++n;
    }
    return n ? acc / double(n) : 0.0;
}

inline double psnr(const Texture& pred, const Texture& target, MaskMode mode = MaskMode::covered) {
    if (pred.width != target.width || pred.height != target.height) fail_data("psnr: dimension mismatch");
    double mse = 0;
    size_t n = 0;
    for (size_t t = 0; t < pred.texels.size(); ++t) {
        if (!target.filled[t]) continue;
        if (mode == MaskMode::covered && !pred.filled[t]) continue;
        Vec3f d = pred.texels[t] - target.texels[t];
        mse += (double(d.x) * d.x + double(d.y) * d.y + double(d.z) * d.z) / 3.0;
        ++n;
    }
    if (n == 0) return 99.0;
    mse /= double(n);
    if (mse < 1e-12) return 99.0;
    return 10.0 * std::log10(1.0 / mse);
}

// Fraction of valid texels that are filled.
inline double coverage(const Texture& tex, const TexelMap& map) {
    size_t valid = 0, filled = 0;
    for (size_t t = 0; t < map.entries.size(); ++t) {
        if (!map.entries[t].valid) continue;
        ++valid;
        filled += tex.filled[t] != 0;
    }
    return valid ? double(filled) / double(valid) : 0.0;
}

// Texel pairs adjacent on the surface but separated in UV space, one group
// per seam mesh edge, weighted by surface arclength.
struct SeamPair {
    uint32_t a, b;  // linear texel indices
    double weight;
    uint32_t edge_id;
};

struct SeamGraph {
    std::vector<SeamPair> pairs;
    uint32_t seam_edge_count = 0;
};

namespace detail {

struct SeamSide {
    uint32_t face;
    Vec2d uv_a, uv_b, uv_opposite;
};

// Texel under a UV point nudged off the seam into the face's interior.
// Returns -1 when no chart-consistent texel is found.
inline int64_t seam_texel(const TexelMap& map, const std::vector<uint32_t>& face_chart, const SeamSide& side,
                          double t) {
    Vec2d e = lerp(side.uv_a, side.uv_b, t);
    Vec2d inward = side.uv_opposite - e;
    // Work in texel units so the nudge is resolution-independent.
    Vec2d e_tx{e.x * map.width, e.y * map.height};
    Vec2d in_tx{inward.x * map.width, inward.y * map.height};
    double len = norm(in_tx);
    if (len < 1e-12) return -1;
    in_tx = in_tx / len;
    for (double step : {0.35, 0.75, 1.25}) {
        int i = int(std::floor(e_tx.x + in_tx.x * step));
        int j = int(std::floor(e_tx.y + in_tx.y * step));
        if (i < 0 || i >= map.width || j < 0 || j >= map.height) continue;
        const TexelEntry& entry = map.at(i, j);
        if (!entry.valid) continue;
        if (face_chart[entry.face] != face_chart[side.face]) continue;
        return int64_t(j) * map.width + i;
    }
    return -1;
}

}  // namespace detail

inline SeamGraph build_seam_graph(const Mesh& mesh, const TexelMap& map) {
    SeamGraph graph;
    std::vector<uint32_t> face_chart = compute_uv_charts(mesh);

    struct EdgeUse {
        uint32_t face;
        int corner;  // corner index of the edge start within the face
    };
    std::map<std::pair<uint32_t, uint32_t>, std::vector<EdgeUse>> edges;
    for (uint32_t f = 0; f < mesh.faces.size(); ++f)
        for (int k = 0; k < 3; ++k) {
            uint32_t a = mesh.faces[f][k], b = mesh.faces[f][(k + 1) % 3];
            if (a == b) continue;
            auto key = std::minmax(a, b);
            edges[{key.first, key.second}].push_back({f, k});
        }

    constexpr double kUvEps = 1e-9;
    auto corner_uv = [&](const EdgeUse& u, int offset) {
        return mesh.uv_coords[mesh.face_uv_indices[u.face][(u.corner + offset) % 3]];
    };
    uint32_t edge_id = 0;
    for (const auto& [key, uses] : edges) {
        if (uses.size() != 2) continue;  // boundary or non-manifold
        // Orient both sides from vertex key.first to key.second.
        detail::SeamSide sides[2];
        bool uv_same = true;
        for (int s = 0; s < 2; ++s) {
            const EdgeUse& u = uses[size_t(s)];
            Vec2d ua = corner_uv(u, 0), ub = corner_uv(u, 1);
            if (mesh.faces[u.face][u.corner] != key.first) std::swap(ua, ub);
            sides[s] = {u.face, ua, ub, corner_uv(u, 2)};
        }
        uv_same = std::abs(sides[0].uv_a.x - sides[1].uv_a.x) < kUvEps &&
                  std::abs(sides[0].uv_a.y - sides[1].uv_a.y) < kUvEps &&
                  std::abs(sides[0].uv_b.x - sides[1].uv_b.x) < kUvEps &&
                  std::abs(sides[0].uv_b.y - sides[1].uv_b.y) < kUvEps;
        if (uv_same) continue;  // UV-continuous edge: not a seam

        double edge_len = norm(mesh.vertices[key.second] - mesh.vertices[key.first]);
        double len_tx = 0;
        for (const auto& side : sides) {
            Vec2d d{(side.uv_b.x - side.uv_a.x) * map.width, (side.uv_b.y - side.uv_a.y) * map.height};
            len_tx = std::max(len_tx, norm(d));
        }
        int samples = std::max(1, int(std::ceil(len_tx)));
        bool emitted = false;
        int64_t prev_a = -1, prev_b = -1;
        for (int k = 0; k < samples; ++k) {
            double t = (k + 0.5) / samples;
            int64_t ta = detail::seam_texel(map, face_chart, sides[0], t);
            int64_t tb = detail::seam_texel(map, face_chart, sides[1], t);
            if (ta < 0 || tb < 0 || ta == tb) continue;
            // Drop UV-adjacent pairs: the seam must separate them in UV space.
            int ax = int(ta % map.width), ay = int(ta / map.width);
            int bx = int(tb % map.width), by = int(tb / map.width);
            if (std::abs(ax - bx) <= 1 && std::abs(ay - by) <= 1) continue;
            if (ta == prev_a && tb == prev_b) {
                graph.pairs.back().weight += edge_len / samples;
                continue;
            }
            graph.pairs.push_back({uint32_t(ta), uint32_t(tb), edge_len / samples, edge_id});
            prev_a = ta;
            prev_b = tb;
            emitted = true;
        }
        if (emitted) ++edge_id;
    }
    graph.seam_edge_count = edge_id;
    return graph;
}

// Length-weighted mean color difference across seam pairs. Pairs touching an
// unfilled texel are skipped and counted.
inline double seam_energy(const Texture& tex, const SeamGraph& graph, size_t* skipped_pairs = nullptr) {
    double acc = 0, wsum = 0;
    size_t skipped = 0;
    for (const auto& p : graph.pairs) {
        if (!tex.filled[p.a] || !tex.filled[p.b]) {
            ++skipped;
            continue;
        }
        Vec3f d = tex.texels[p.a] - tex.texels[p.b];
        acc += p.weight * (std::abs(d.x) + std::abs(d.y) + std::abs(d.z)) / 3.0;
        wsum += p.weight;
    }
    if (skipped_pairs) *skipped_pairs = skipped;
    return wsum > 0 ? acc / wsum : 0.0;
}

// --- Comparison tables -------------------------------------------------------

struct EvalRow {
    std::string scene;
    std::string strategy;
    int K = 3;
    bool geodesics = true;
    double thr = 0.1;
    double l1 = 0;
    double psnr_db = 0;
    double seam = 0;
    double coverage_frac = 0;
    double wall_ms = 0;  // 0 unless timing collection was requested
};

inline void write_eval_csv(const std::vector<EvalRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail_data("cannot write CSV: " + path);
    out << "scene,strategy,K,geodesics,thr,L1,PSNR,seam_energy,coverage,wall_time_ms\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%d,%s,%.4g,%.6f,%.3f,%.6f,%.6f,%.0f\n", r.scene.c_str(),
                      r.strategy.c_str(), r.K, r.geodesics ? "on" : "off", r.thr, r.l1, r.psnr_db, r.seam,
                      r.coverage_frac, r.wall_ms);
        out << buf;
    }
    if (!out) fail_data("write failed: " + path);
}

}  // namespace stx

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stx/gather.hpp"
#include "stx/net.hpp"
#include "stx/texelmap.hpp"
#include "stx/texture.hpp"

namespace stx {

enum class Strategy { frontfacing, average, weighted, neural };

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::frontfacing: return "frontfacing";
        case Strategy::average: return "average";
        case Strategy::weighted: return "weighted";
        case Strategy::neural: return "neural";
    }
    return "?";
}

inline Strategy strategy_from_name(const std::string& s) {
    if (s == "frontfacing") return Strategy::frontfacing;
    if (s == "average") return Strategy::average;
    if (s == "weighted") return Strategy::weighted;
    if (s == "neural") return Strategy::neural;
    fail_usage("unknown strategy: " + s);
}

struct BackprojectOptions {
    double thr = 0.1;    // n.v acceptance threshold for the heuristic strategies
    double power = 1.0;  // weighted-average exponent
    int K = 3;
    double visibility_epsilon = 1e-3;
    double geodesic_radius = kDefaultGeodesicRadius;
    bool use_geodesics = true;
    int workers = 1;
};

namespace detail {

struct QualifyingView {
    uint32_t view;
    double ndotv;
    Vec3f color;
};

// Views where the texel's surface point is visible, front-facing beyond thr,
// and projects inside the image; color sampled at the center pixel.
inline std::vector<QualifyingView> qualifying_views(const TexelEntry& e, const std::vector<ViewBundle>& views,
                                                    const BackprojectOptions& opts) {
    std::vector<QualifyingView> out;
    for (uint32_t v = 0; v < views.size(); ++v) {
        const ViewBundle& vb = views[v];
        if (!visibility_test(vb.gbuffer, vb.camera, e.position, opts.visibility_epsilon)) continue;
        double nv = dot(e.normal, view_vector(vb.camera, e.position));
        if (nv <= opts.thr) continue;
        auto pr = project(vb.camera, e.position);
        int px = int(std::floor(pr->pixel.x));
        int py = int(std::floor(pr->pixel.y));
        out.push_back({v, nv, vb.image.at(px, py)});
    }
    return out;
}

template <typename PerTexel>
Texture drive_backprojection(const TexelMap& map, const Texture* current, int workers, PerTexel&& fn) {
    Texture tex = current ? *current : Texture(map.width, map.height);
    if (current && (current->width != map.width || current->height != map.height))
        fail_data("backproject: current texture dimensions disagree with the texel map");
    parallel_for(size_t(map.height), workers, [&](size_t j) {
        for (int i = 0; i < map.width; ++i) {
            const TexelEntry& e = map.at(i, int(j));
            if (!e.valid) continue;
            std::optional<Vec3f> c = fn(i, int(j), e);
            if (c) tex.set(i, int(j), *c);
        }
    });
    return tex;
}

}  // namespace detail

// Copy the color from the most front-facing qualifying view (argmax n.v, ties
// to the lowest view id). Texels with no qualifying view stay as they are.
inline Texture backproject_frontfacing(const Mesh& mesh, const TexelMap& map, const std::vector<ViewBundle>& views,
                                       const BackprojectOptions& opts = {}, const Texture* current = nullptr) {
    (void)mesh;
    return detail::drive_backprojection(map, current, opts.workers,
                                        [&](int, int, const TexelEntry& e) -> std::optional<Vec3f> {
                                            auto q = detail::qualifying_views(e, views, opts);
                                            if (q.empty()) return std::nullopt;
                                            size_t best = 0;
                                            for (size_t i = 1; i < q.size(); ++i)
                                                if (q[i].ndotv > q[best].ndotv) best = i;
                                            return q[best].color;
                                        });
}

// Unweighted mean over qualifying views.
inline Texture backproject_average(const Mesh& mesh, const TexelMap& map, const std::vector<ViewBundle>& views,
                                   const BackprojectOptions& opts = {}, const Texture* current = nullptr) {
    (void)mesh;
    return detail::drive_backprojection(map, current, opts.workers,
                                        [&](int, int, const TexelEntry& e) -> std::optional<Vec3f> {
                                            auto q = detail::qualifying_views(e, views, opts);
                                            if (q.empty()) return std::nullopt;
                                            Vec3d acc{0, 0, 0};
                                            for (const auto& qv : q) acc += to_d(qv.color);
                                            return to_f(acc / double(q.size()));
                                        });
}

// Mean weighted by (n.v)^power, normalized over qualifying views.
inline Texture backproject_weighted(const Mesh& mesh, const TexelMap& map, const std::vector<ViewBundle>& views,
                                    const BackprojectOptions& opts = {}, const Texture* current = nullptr) {
    (void)mesh;
    if (opts.power < 0) fail_usage("backproject_weighted: power must be >= 0");
    return detail::drive_backprojection(
        map, current, opts.workers, [&](int, int, const TexelEntry& e) -> std::optional<Vec3f> {
            auto q = detail::qualifying_views(e, views, opts);
            if (q.empty()) return std::nullopt;
            // Normalize by the best n.v before exponentiating so large powers
            // cannot underflow every weight to zero.
            double nv_max = 0;
            for (const auto& qv : q) nv_max = std::max(nv_max, qv.ndotv);
            Vec3d acc{0, 0, 0};
            double wsum = 0;
            for (const auto& qv : q) {
                double w = nv_max > 0 ? std::pow(std::max(qv.ndotv / nv_max, 0.0), opts.power) : 1.0;
                acc += to_d(qv.color) * w;
                wsum += w;
            }
            return to_f(acc / wsum);
        });
}

// Learned backprojection: gather K x K neighborhoods across views and run the
// attention network per texel. The current texture (when given) seeds the
// texel's appearance encoding and is preserved where the neighborhood is
// empty.
inline Texture backproject_neural(const Mesh& mesh, const TexelMap& map, const std::vector<ViewBundle>& views,
                                  const NetWeights& weights, const BackprojectOptions& opts = {},
                                  const Texture* current = nullptr) {
    if (opts.K < 1 || opts.K % 2 == 0) fail_usage("backproject_neural: K must be odd and >= 1");
    EdgeGraph graph;
    std::optional<GeodesicCache> cache;
    if (opts.use_geodesics) {
        graph = build_edge_graph(mesh);
        cache.emplace(mesh_hash(mesh), opts.geodesic_radius);
    }
    GatherOptions gopts;
    gopts.K = opts.K;
    gopts.visibility_epsilon = opts.visibility_epsilon;
    gopts.geodesic_radius = opts.geodesic_radius;
    gopts.use_geodesics = opts.use_geodesics;
    return detail::drive_backprojection(
        map, current, opts.workers, [&](int i, int j, const TexelEntry& e) -> std::optional<Vec3f> {
            NeighborSet ns = gather_texel(mesh, map, i, j, views, opts.use_geodesics ? &graph : nullptr,
                                          cache ? &*cache : nullptr, gopts);
            std::optional<Vec3d> cur;
            if (current && current->is_filled(i, j)) cur = to_d(current->at(i, j));
            auto out = forward(weights, e, ns, cur);
            if (!out) return std::nullopt;
            return to_f(*out);
        });
}

// One pass of the selected strategy over a subset of views.
inline Texture backproject_pass(Strategy strategy, const Mesh& mesh, const TexelMap& map,
                                const std::vector<ViewBundle>& views, const NetWeights* weights,
                                const BackprojectOptions& opts, const Texture* current) {
    switch (strategy) {
        case Strategy::frontfacing: return backproject_frontfacing(mesh, map, views, opts, current);
        case Strategy::average: return backproject_average(mesh, map, views, opts, current);
        case Strategy::weighted: return backproject_weighted(mesh, map, views, opts, current);
        case Strategy::neural:
            if (!weights) fail_usage("neural strategy requires a weights file");
            return backproject_neural(mesh, map, views, *weights, opts, current);
    }
    fail_usage("unknown strategy");
}

// Iterative multi-pass texturing over an ordered view schedule. Each group
// backprojects into the running texture; neural mode seeds texel encodings
// from it. Previously filled texels are overwritten when a pass produces a
// color and kept otherwise.
inline Texture run_iterative(const Mesh& mesh, const TexelMap& map, const std::vector<ViewBundle>& views,
                             const std::vector<std::vector<int>>& schedule, Strategy strategy,
                             const NetWeights* weights = nullptr, const BackprojectOptions& opts = {}) {
    Texture tex(map.width, map.height);
    for (const auto& group : schedule) {
        std::vector<ViewBundle> group_views;
        for (int v : group) {
            if (v < 0 || size_t(v) >= views.size())
                fail_usage(strprintf("run_iterative: schedule references unknown view %d", v));
            group_views.push_back(views[size_t(v)]);
        }
        if (group_views.empty()) continue;
        tex = backproject_pass(strategy, mesh, map, group_views, weights, opts, &tex);
    }
    return tex;
}

// The three-iteration schedule over the six-view ring: front/back, sides,
// top/bottom.
inline std::vector<std::vector<int>> paired_schedule() { return {{0, 1}, {2, 3}, {4, 5}}; }

namespace detail {

struct PullPushLevel {
    int w, h;
    std::vector<Vec3d> color;
    std::vector<double> weight;
};

// Pull-push over an arbitrary texel subset: `inside` marks the domain,
// `texture.filled` marks the sources. Fills every inside hole reachable from
// at least one source (always, via the 1x1 apex).
inline void pull_push_domain(Texture& tex, const std::vector<uint8_t>& inside) {
    std::vector<PullPushLevel> pyr;
    PullPushLevel base;
    base.w = tex.width;
    base.h = tex.height;
    base.color.resize(size_t(base.w) * base.h, Vec3d{0, 0, 0});
    base.weight.resize(size_t(base.w) * base.h, 0.0);
    for (int j = 0; j < tex.height; ++j)
        for (int i = 0; i < tex.width; ++i) {
            size_t t = tex.index(i, j);
            if (inside[t] && tex.filled[t]) {
                base.color[t] = to_d(tex.texels[t]);
                base.weight[t] = 1.0;
            }
        }
    pyr.push_back(std::move(base));
    while (pyr.back().w > 1 || pyr.back().h > 1) {
        const PullPushLevel& fine = pyr.back();
        PullPushLevel coarse;
        coarse.w = std::max(1, (fine.w + 1) / 2);
        coarse.h = std::max(1, (fine.h + 1) / 2);
        coarse.color.resize(size_t(coarse.w) * coarse.h, Vec3d{0, 0, 0});
        coarse.weight.resize(size_t(coarse.w) * coarse.h, 0.0);
        for (int j = 0; j < fine.h; ++j)
            for (int i = 0; i < fine.w; ++i) {
                size_t fi = size_t(j) * fine.w + i;
                if (fine.weight[fi] <= 0) continue;
                size_t ci = size_t(j / 2) * coarse.w + i / 2;
                coarse.color[ci] += fine.color[fi] * fine.weight[fi];
                coarse.weight[ci] += fine.weight[fi];
            }
        for (size_t i = 0; i < coarse.color.size(); ++i)
            if (coarse.weight[i] > 0) coarse.color[i] = coarse.color[i] / coarse.weight[i];
        pyr.push_back(std::move(coarse));
    }
    // Push: holes inherit their parent's color.
    for (size_t l = pyr.size() - 1; l-- > 0;) {
        PullPushLevel& fine = pyr[l];
        const PullPushLevel& coarse = pyr[l + 1];
        for (int j = 0; j < fine.h; ++j)
            for (int i = 0; i < fine.w; ++i) {
                size_t fi = size_t(j) * fine.w + i;
                size_t ci = size_t(j / 2) * coarse.w + i / 2;
                if (fine.weight[fi] <= 0 && coarse.weight[ci] > 0) {
                    fine.color[fi] = coarse.color[ci];
                    fine.weight[fi] = coarse.weight[ci];
                }
            }
    }
    const PullPushLevel& filled = pyr[0];
    for (int j = 0; j < tex.height; ++j)
        for (int i = 0; i < tex.width; ++i) {
            size_t t = tex.index(i, j);
            if (inside[t] && !tex.filled[t] && filled.weight[t] > 0)
                tex.set(i, j, to_f(clamped01(filled.color[t])));
        }
}

}  // namespace detail

// Hole filling: per-chart pull-push (so colors never bleed across chart
// boundaries), then a global pass for gutter texels outside any chart and for
// charts that received no color at all.
inline Texture inpaint_pullpush(const Texture& texture, const Mesh& mesh, const TexelMap& map) {
    if (texture.width != map.width || texture.height != map.height)
        fail_data("inpaint_pullpush: texture dimensions disagree with the texel map");
    if (texture.filled_count() == 0) fail_data("inpaint_pullpush: fully-empty texture");

    Texture out = texture;
    std::vector<uint32_t> chart = texel_chart_ids(mesh, map);
    uint32_t nchart = 0;
    for (uint32_t c : chart)
        if (c != 0xffffffffu) nchart = std::max(nchart, c + 1);

    std::vector<uint8_t> inside(out.texels.size());
    for (uint32_t c = 0; c < nchart; ++c) {
        bool any_hole = false, any_source = false;
        for (size_t t = 0; t < chart.size(); ++t) {
            inside[t] = chart[t] == c;
            if (inside[t]) (out.filled[t] ? any_source : any_hole) = true;
        }
        if (any_hole && any_source) detail::pull_push_domain(out, inside);
    }

    // Gutters and (degenerate case) charts with no sources at all.
    bool any_hole = false;
    for (size_t t = 0; t < out.filled.size(); ++t) any_hole |= !out.filled[t];
    if (any_hole) {
        std::fill(inside.begin(), inside.end(), 1);
        detail::pull_push_domain(out, inside);
    }
    return out;
}

}  // namespace stx

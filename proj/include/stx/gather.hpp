#pragma once

#include <cstdint>
#include <vector>

#include "stx/camera.hpp"
#include "stx/geodesics.hpp"
#include "stx/mesh.hpp"
#include "stx/parallel.hpp"
#include "stx/raster.hpp"
#include "stx/texelmap.hpp"

namespace stx {

// One viewpoint: camera, the (externally generated or rendered) RGB image,
// and our own G-buffer for that camera.
struct ViewBundle {
    Camera camera;
    ImageRGB image;
    GBuffer gbuffer;

    void validate() const {
        if (image.width != camera.width || image.height != camera.height ||
            gbuffer.width != camera.width || gbuffer.height != camera.height)
            fail_data("view bundle: image/G-buffer dimensions disagree with camera");
    }
};

inline ViewBundle make_view_bundle(const Mesh& mesh, const Camera& camera, ImageRGB image, int workers = 1) {
    ViewBundle vb{camera, std::move(image), render_gbuffer(mesh, camera, workers)};
    vb.validate();
    return vb;
}

// True iff `point` is the surface actually seen at its projected pixel:
// foreground there and within epsilon of the stored depth. The comparison is
// slope-compensated: the G-buffer holds depth at the pixel center, so on
// oblique surfaces the point's depth legitimately differs by up to the local
// depth gradient across the pixel. The bias is capped so occluders separated
// by more than ~0.05 depth units never pass.
inline bool visibility_test(const GBuffer& gb, const Camera& cam, const Vec3d& point, double epsilon) {
    auto pr = project(cam, point);
    if (!pr) return false;
    int px = int(std::floor(pr->pixel.x));
    int py = int(std::floor(pr->pixel.y));
    if (px < 0 || px >= gb.width || py < 0 || py >= gb.height) return false;
    size_t i = gb.index(px, py);
    if (!gb.mask[i]) return false;
    double bias = 0;
    const int nx[4] = {px - 1, px + 1, px, px};
    const int ny[4] = {py, py, py - 1, py + 1};
    for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= gb.width || ny[k] < 0 || ny[k] >= gb.height) continue;
        size_t n = gb.index(nx[k], ny[k]);
        if (gb.mask[n]) bias = std::max(bias, std::abs(gb.depth[n] - gb.depth[i]));
    }
    bias = std::min(bias, 0.05);
    return std::abs(pr->depth - gb.depth[i]) <= epsilon + bias;
}

struct NeighborRecord {
    Vec3f color;       // from the view image, in [0,1]
    Vec3d position;    // surface point under the pixel
    Vec3d normal;
    double ndotv = 0;  // pixel normal . view vector
    double geodesic = 0;  // surface distance to the texel point, clamped at the window radius
    uint32_t view_id = 0;
    int px = 0, py = 0;
};

struct NeighborSet {
    int texel_x = 0, texel_y = 0;
    std::vector<NeighborRecord> records;

    bool empty() const { return records.empty(); }
};

struct GatherOptions {
    int K = 3;
    double visibility_epsilon = 1e-3;
    double geodesic_radius = kDefaultGeodesicRadius;
    bool use_geodesics = true;
    int workers = 1;
};

// K x K neighborhood gathering for a single valid texel. Records are ordered
// (view, row, column); background pixels are discarded; views where the
// texel's point fails the visibility test contribute nothing.
inline NeighborSet gather_texel(const Mesh& mesh, const TexelMap& map, int tx, int ty,
                                const std::vector<ViewBundle>& views, const EdgeGraph* graph,
                                GeodesicCache* cache, const GatherOptions& opts) {
    NeighborSet ns;
    ns.texel_x = tx;
    ns.texel_y = ty;
    const TexelEntry& entry = map.at(tx, ty);
    if (!entry.valid) return ns;

    std::shared_ptr<const GeodesicField> field;
    GeodesicField local_field;
    const GeodesicField* fieldp = nullptr;
    if (opts.use_geodesics && graph) {
        SurfacePoint src{entry.face, entry.bary};
        if (!graph->face_degenerate[entry.face]) {
            if (cache) {
                field = cache->get(mesh, *graph, src);
                fieldp = field.get();
            } else {
                local_field = geodesic_field(mesh, *graph, src, opts.geodesic_radius);
                fieldp = &local_field;
            }
        }
    }

    int half = opts.K / 2;
    for (uint32_t v = 0; v < views.size(); ++v) {
        const ViewBundle& vb = views[v];
        if (!visibility_test(vb.gbuffer, vb.camera, entry.position, opts.visibility_epsilon)) continue;
        auto pr = project(vb.camera, entry.position);
        int cx = int(std::floor(pr->pixel.x));
        int cy = int(std::floor(pr->pixel.y));
        for (int dy = -half; dy <= half; ++dy) {
            for (int dx = -half; dx <= half; ++dx) {
                int px = cx + dx, py = cy + dy;
                if (px < 0 || px >= vb.gbuffer.width || py < 0 || py >= vb.gbuffer.height) continue;
                size_t i = vb.gbuffer.index(px, py);
                if (!vb.gbuffer.mask[i]) continue;

                NeighborRecord rec;
                rec.color = vb.image.at(px, py);
                rec.position = vb.gbuffer.position[i];
                rec.normal = vb.gbuffer.normal[i];
                rec.ndotv = std::clamp(dot(rec.normal, view_vector(vb.camera, rec.position)), -1.0, 1.0);
                rec.view_id = v;
                rec.px = px;
                rec.py = py;

                if (!opts.use_geodesics) {
                    rec.geodesic = 0.0;
                } else if (fieldp) {
                    SurfacePoint tgt{vb.gbuffer.face[i],
                                     barycentric_of_point(mesh, vb.gbuffer.face[i], rec.position)};
                    auto d = geodesic_distance(mesh, *fieldp, tgt);
                    rec.geodesic = d ? std::min(*d, opts.geodesic_radius) : opts.geodesic_radius;
                } else {
                    rec.geodesic = opts.geodesic_radius;  // texel on a degenerate face: saturate
                }
                ns.records.push_back(rec);
            }
        }
    }
    return ns;
}

// Materializes neighbor sets for every valid texel (row-major). Practical for
// test-sized atlases; full-resolution pipelines drive gather_texel per texel.
inline std::vector<NeighborSet> gather_neighborhoods(const Mesh& mesh, const TexelMap& map,
                                                     const std::vector<ViewBundle>& views,
                                                     const EdgeGraph* graph, GeodesicCache* cache,
                                                     const GatherOptions& opts) {
    if (opts.K < 1 || opts.K % 2 == 0) fail_usage("gather: K must be odd and >= 1");
    for (const auto& v : views) v.validate();
    std::vector<std::pair<int, int>> valid;
    for (int j = 0; j < map.height; ++j)
        for (int i = 0; i < map.width; ++i)
            if (map.at(i, j).valid) valid.push_back({i, j});
    std::vector<NeighborSet> out(valid.size());
    parallel_for(valid.size(), opts.workers, [&](size_t k) {
        out[k] = gather_texel(mesh, map, valid[k].first, valid[k].second, views, graph, cache, opts);
    });
    return out;
}

// Re-fetches record colors from (possibly different) images of the same
// cameras; geometry is untouched. Used when views are re-rendered or
// perturbed without moving the cameras.
inline void recolor_records(NeighborSet& ns, const std::vector<ViewBundle>& views) {
    for (auto& rec : ns.records) rec.color = views[rec.view_id].image.at(rec.px, rec.py);
}

}  // namespace stx

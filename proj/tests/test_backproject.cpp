#include <catch2/catch_amalgamated.hpp>

#include "stx/backproject.hpp"
#include "stx/primitives.hpp"
#include "test_util.hpp"

using namespace stx;
using Catch::Approx;

namespace {

Camera cam_at(Vec3d pos, int res = 96) {
    Camera c;
    c.position = pos;
    c.look_at = {0, 0, 0};
    c.width = c.height = res;
    return c;
}

// View bundles with per-view constant-color images over a real G-buffer.
std::vector<ViewBundle> solid_views(const Mesh& mesh, const std::vector<Camera>& cams,
                                    const std::vector<Vec3f>& colors) {
    std::vector<ViewBundle> out;
    for (size_t i = 0; i < cams.size(); ++i)
        out.push_back(make_view_bundle(mesh, cams[i], ImageRGB(cams[i].width, cams[i].height, colors[i])));
    return out;
}

// Independent per-texel reimplementation of the selection/averaging
// semantics: exhaustive loop over views with inline visibility and threshold
// logic, mirroring nothing of the production drive path.
struct OracleResult {
    bool any = false;
    Vec3f frontfacing{0, 0, 0};
    Vec3f average{0, 0, 0};
    Vec3f weighted{0, 0, 0};
};

OracleResult oracle_texel(const TexelEntry& e, const std::vector<ViewBundle>& views, double thr, double power,
                          double eps) {
    OracleResult r;
    struct Q {
        double nv;
        Vec3f c;
    };
    std::vector<Q> qual;
    for (size_t v = 0; v < views.size(); ++v) {
        const ViewBundle& vb = views[v];
        if (!visibility_test(vb.gbuffer, vb.camera, e.position, eps)) continue;
        auto pr = project(vb.camera, e.position);
        int px = int(std::floor(pr->pixel.x)), py = int(std::floor(pr->pixel.y));
        double nv = dot(e.normal, normalized(vb.camera.position - e.position));
        if (nv <= thr) continue;
        qual.push_back({nv, vb.image.at(px, py)});
    }
    if (qual.empty()) return r;
    r.any = true;
    double best_nv = -2, nv_max = 0;
    Vec3d sum{0, 0, 0};
    for (const auto& q : qual) {
        if (q.nv > best_nv) {
            best_nv = q.nv;
            r.frontfacing = q.c;
        }
        sum += to_d(q.c);
        nv_max = std::max(nv_max, q.nv);
    }
    r.average = to_f(sum / double(qual.size()));
    Vec3d wsum{0, 0, 0};
    double wtotal = 0;
    for (const auto& q : qual) {
        double w = nv_max > 0 ? std::pow(std::max(q.nv / nv_max, 0.0), power) : 1.0;
        wsum += to_d(q.c) * w;
        wtotal += w;
    }
    r.weighted = to_f(wsum / wtotal);
    return r;
}

}  // namespace

TEST_CASE("baselines: match the exhaustive per-texel oracle on a 3-view scene", "[backproject]") {
    Mesh mesh = compute_normals(normalize_mesh(make_uv_sphere(32, 24)));
    TexelMap map = build_texel_map(mesh, 48, 48);
    std::vector<Camera> cams{cam_at({0, 0, 2}), cam_at({2, 0, 0}), cam_at({0.3, 1.9, 0.4})};
    // Distinct constant colors per view keep selection differences visible.
    std::vector<ViewBundle> views = solid_views(mesh, cams, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});

    BackprojectOptions opts;
    opts.thr = 0.1;
    opts.power = 1.0;
    Texture front = backproject_frontfacing(mesh, map, views, opts);
    Texture avg = backproject_average(mesh, map, views, opts);
    Texture wgt = backproject_weighted(mesh, map, views, opts);

    size_t covered = 0;
    for (int j = 0; j < map.height; ++j)
        for (int i = 0; i < map.width; ++i) {
            const TexelEntry& e = map.at(i, j);
            if (!e.valid) continue;
            OracleResult expect = oracle_texel(e, views, opts.thr, opts.power, opts.visibility_epsilon);
            REQUIRE(front.is_filled(i, j) == expect.any);
            REQUIRE(avg.is_filled(i, j) == expect.any);
            REQUIRE(wgt.is_filled(i, j) == expect.any);
            if (!expect.any) continue;
            ++covered;
            REQUIRE(front.at(i, j) == expect.frontfacing);
            REQUIRE(avg.at(i, j) == expect.average);
            REQUIRE(wgt.at(i, j) == expect.weighted);
        }
    REQUIRE(covered > 500);
}

TEST_CASE("baselines: argmax, mean, threshold basics", "[backproject]") {
    Mesh mesh = compute_normals(stxtest::make_square_mesh());
    TexelMap map = build_texel_map(mesh, 16, 16);
    // Camera 0 on-axis (n.v ~ 1), camera 1 oblique (lower n.v).
    std::vector<Camera> cams{cam_at({0, 0, 2}), cam_at({1.6, 0, 1.2})};
    std::vector<ViewBundle> views = solid_views(mesh, cams, {{1, 0, 0}, {0, 0, 1}});
    BackprojectOptions opts;

    Texture front = backproject_frontfacing(mesh, map, views, opts);
    REQUIRE(front.at(8, 8) == Vec3f{1, 0, 0});  // the on-axis view wins

    Texture avg = backproject_average(mesh, map, views, opts);
    REQUIRE(avg.at(8, 8).x == Approx(0.5).margin(1e-6));
    REQUIRE(avg.at(8, 8).z == Approx(0.5).margin(1e-6));

    // A threshold above every n.v empties the texture.
    opts.thr = 0.9999;
    Texture cut = backproject_frontfacing(mesh, map, views, opts);
    REQUIRE(cut.filled_count() == 0);
}

TEST_CASE("baselines: single qualifying view makes all strategies agree", "[backproject]") {
    Mesh mesh = compute_normals(stxtest::make_square_mesh());
    TexelMap map = build_texel_map(mesh, 12, 12);
    std::vector<ViewBundle> views = solid_views(mesh, {cam_at({0, 0, 2})}, {{0.3f, 0.7f, 0.2f}});
    BackprojectOptions opts;
    Texture front = backproject_frontfacing(mesh, map, views, opts);
    Texture avg = backproject_average(mesh, map, views, opts);
    Texture wgt = backproject_weighted(mesh, map, views, opts);
    REQUIRE(front.texels == avg.texels);
    REQUIRE(front.texels == wgt.texels);
    REQUIRE(front.filled == avg.filled);
}

TEST_CASE("weighted: power 0 equals average, large power approaches frontfacing", "[backproject]") {
    Mesh mesh = compute_normals(normalize_mesh(make_uv_sphere(24, 16)));
    TexelMap map = build_texel_map(mesh, 32, 32);
    std::vector<Camera> cams{cam_at({0, 0, 2}), cam_at({1.4, 0, 1.4})};
    std::vector<ViewBundle> views = solid_views(mesh, cams, {{1, 0, 0}, {0, 0, 1}});
    BackprojectOptions opts;

    opts.power = 0.0;
    Texture w0 = backproject_weighted(mesh, map, views, opts);
    Texture avg = backproject_average(mesh, map, views, opts);
    REQUIRE(w0.texels == avg.texels);

    opts.power = 400.0;
    Texture winf = backproject_weighted(mesh, map, views, opts);
    Texture front = backproject_frontfacing(mesh, map, views, opts);
    for (size_t t = 0; t < winf.texels.size(); ++t) {
        if (!winf.filled[t]) continue;
        REQUIRE(norm(to_d(winf.texels[t]) - to_d(front.texels[t])) < 1e-5);
    }
}

TEST_CASE("neural: no views yields an all-empty texture", "[backproject]") {
    Mesh mesh = compute_normals(stxtest::make_square_mesh());
    TexelMap map = build_texel_map(mesh, 8, 8);
    NetWeights w = init_weights(3);
    Texture tex = backproject_neural(mesh, map, {}, w);
    REQUIRE(tex.filled_count() == 0);
}

TEST_CASE("neural: zero-V weights give a constant texture", "[backproject]") {
    Mesh mesh = compute_normals(stxtest::make_square_mesh());
    TexelMap map = build_texel_map(mesh, 12, 12);
    Texture src = stxtest::constant_texture(12, 12, {0.8f, 0.2f, 0.4f});
    std::vector<ViewBundle> views{
        make_view_bundle(mesh, cam_at({0, 0, 2}), render_textured(mesh, src, cam_at({0, 0, 2})))};
    NetWeights w = init_weights(5);
    for (int b = 0; b < 3; ++b)
        std::fill(w.t(strprintf("blk%d.v", b)).data.begin(), w.t(strprintf("blk%d.v", b)).data.end(), 0.0);
    Texture tex = backproject_neural(mesh, map, views, w);
    REQUIRE(tex.filled_count() > 0);
    Vec3f first{0, 0, 0};
    bool got = false;
    for (size_t t = 0; t < tex.texels.size(); ++t) {
        if (!tex.filled[t]) continue;
        if (!got) {
            first = tex.texels[t];
            got = true;
        }
        REQUIRE(norm(to_d(tex.texels[t]) - to_d(first)) < 1e-9);
    }
}

TEST_CASE("run_iterative: single group equals single pass; empty schedule stays empty", "[backproject]") {
    Mesh mesh = compute_normals(normalize_mesh(make_uv_sphere(24, 16)));
    TexelMap map = build_texel_map(mesh, 24, 24);
    auto cams = make_view_ring(6, {}, 2.0, 64);
    std::vector<Vec3f> colors{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {0, 1, 1}, {1, 0, 1}};
    std::vector<ViewBundle> views = solid_views(mesh, cams, colors);
    BackprojectOptions opts;

    Texture once = backproject_frontfacing(mesh, map, views, opts);
    Texture sched = run_iterative(mesh, map, views, {{0, 1, 2, 3, 4, 5}}, Strategy::frontfacing, nullptr, opts);
    REQUIRE(once.texels == sched.texels);
    REQUIRE(once.filled == sched.filled);

    Texture empty = run_iterative(mesh, map, views, {}, Strategy::frontfacing, nullptr, opts);
    REQUIRE(empty.filled_count() == 0);

    REQUIRE_THROWS_AS(run_iterative(mesh, map, views, {{0, 9}}, Strategy::frontfacing, nullptr, opts), Error);
}

TEST_CASE("run_iterative: paired schedule never empties filled texels", "[backproject]") {
    Mesh mesh = compute_normals(normalize_mesh(make_uv_sphere(24, 16)));
    TexelMap map = build_texel_map(mesh, 24, 24);
    auto cams = make_view_ring(6, {}, 2.0, 64);
    std::vector<Vec3f> colors(6, Vec3f{0.5f, 0.5f, 0.5f});
    std::vector<ViewBundle> views = solid_views(mesh, cams, colors);
    BackprojectOptions opts;

    Texture running(map.width, map.height);
    size_t prev_filled = 0;
    for (const auto& group : paired_schedule()) {
        std::vector<ViewBundle> group_views;
        for (int v : group) group_views.push_back(views[size_t(v)]);
        Texture before = running;
        running = backproject_frontfacing(mesh, map, group_views, opts, &running);
        for (size_t t = 0; t < running.filled.size(); ++t)
            if (before.filled[t]) REQUIRE(running.filled[t]);
        REQUIRE(running.filled_count() >= prev_filled);
        prev_filled = running.filled_count();
    }
    Texture direct = run_iterative(mesh, map, views, paired_schedule(), Strategy::frontfacing, nullptr, opts);
    REQUIRE(direct.texels == running.texels);
}

namespace {

// Two disconnected quads mapped to separate UV charts (left and right half).
Mesh two_chart_mesh() {
    Mesh m;
    auto add_quad = [&](double z, double u0, double u1) {
        uint32_t base = uint32_t(m.vertices.size());
        m.vertices.push_back({-0.5, -0.5, z});
        m.vertices.push_back({0.5, -0.5, z});
        m.vertices.push_back({0.5, 0.5, z});
        m.vertices.push_back({-0.5, 0.5, z});
        uint32_t t = uint32_t(m.uv_coords.size());
        m.uv_coords.push_back({u0, 0.05});
        m.uv_coords.push_back({u1, 0.05});
        m.uv_coords.push_back({u1, 0.95});
        m.uv_coords.push_back({u0, 0.95});
        m.faces.push_back({base, base + 1, base + 2});
        m.face_uv_indices.push_back({t, t + 1, t + 2});
        m.faces.push_back({base, base + 2, base + 3});
        m.face_uv_indices.push_back({t, t + 2, t + 3});
    };
    add_quad(0.0, 0.05, 0.45);
    add_quad(0.6, 0.55, 0.95);
    return compute_normals(std::move(m));
}

}  // namespace

TEST_CASE("inpaint: fills holes from the same chart only", "[backproject]") {
    Mesh mesh = two_chart_mesh();
    TexelMap map = build_texel_map(mesh, 64, 64);
    std::vector<uint32_t> chart = texel_chart_ids(mesh, map);

    Texture tex(64, 64);
    size_t holes = 0;
    for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i) {
            size_t t = tex.index(i, j);
            if (!map.entries[t].valid) continue;
            if (chart[t] == 0) {
                // Blue chart with a hole in the middle.
                if (i > 10 && i < 18 && j > 24 && j < 40) {
                    ++holes;
                    continue;
                }
                tex.set(i, j, {0, 0, 1});
            } else {
                tex.set(i, j, {0, 1, 0});
            }
        }
    REQUIRE(holes > 0);

    Texture full = inpaint_pullpush(tex, mesh, map);
    for (size_t t = 0; t < full.texels.size(); ++t) {
        REQUIRE(full.filled[t]);  // everything becomes filled
        if (chart[t] == 0) {
            REQUIRE(full.texels[t].z == Approx(1.0).margin(1e-6));
            REQUIRE(full.texels[t].y == Approx(0.0).margin(1e-6));  // never green
        }
        if (chart[t] == 1) {
            REQUIRE(full.texels[t].y == Approx(1.0).margin(1e-6));
            REQUIRE(full.texels[t].z == Approx(0.0).margin(1e-6));  // never blue
        }
    }
}

TEST_CASE("inpaint: idempotent on full coverage, single hole takes neighbor color", "[backproject]") {
    Mesh mesh = compute_normals(stxtest::make_square_mesh());
    TexelMap map = build_texel_map(mesh, 16, 16);
    Texture tex = stxtest::constant_texture(16, 16, {1, 0, 0});
    Texture same = inpaint_pullpush(tex, mesh, map);
    REQUIRE(same.texels == tex.texels);
    REQUIRE(same.filled == tex.filled);

    tex.clear(8, 8);
    Texture filled = inpaint_pullpush(tex, mesh, map);
    REQUIRE(filled.is_filled(8, 8));
    REQUIRE(norm(to_d(filled.at(8, 8)) - Vec3d{1, 0, 0}) < 1e-6);
}

TEST_CASE("inpaint: fully empty texture is an error", "[backproject]") {
    Mesh mesh = compute_normals(stxtest::make_square_mesh());
    TexelMap map = build_texel_map(mesh, 8, 8);
    Texture empty(8, 8);
    REQUIRE_THROWS_AS(inpaint_pullpush(empty, mesh, map), Error);
}

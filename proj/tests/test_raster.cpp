#include <catch2/catch_amalgamated.hpp>

#include "stx/primitives.hpp"
#include "stx/raster.hpp"
#include "test_util.hpp"

using namespace stx;
using Catch::Approx;

namespace {

Camera front_camera(int res = 64, double dist = 2.0) {
    Camera c;
    c.position = {0, 0, dist};
    c.look_at = {0, 0, 0};
    c.width = c.height = res;
    return c;
}

// Two unit quads facing the camera at different depths, the nearer one second
// in face order.
Mesh two_quads(double z_near, double z_far) {
    Mesh m;
    auto quad = [&](double z) {
        uint32_t base = uint32_t(m.vertices.size());
        m.vertices.push_back({-0.5, -0.5, z});
        m.vertices.push_back({0.5, -0.5, z});
        m.vertices.push_back({0.5, 0.5, z});
        m.vertices.push_back({-0.5, 0.5, z});
        uint32_t t = uint32_t(m.uv_coords.size());
        m.uv_coords.push_back({0, 0});
        m.uv_coords.push_back({1, 0});
        m.uv_coords.push_back({1, 1});
        m.uv_coords.push_back({0, 1});
        m.faces.push_back({base, base + 1, base + 2});
        m.face_uv_indices.push_back({t, t + 1, t + 2});
        m.faces.push_back({base, base + 2, base + 3});
        m.face_uv_indices.push_back({t, t + 2, t + 3});
    };
    quad(z_far);
    quad(z_near);
    return compute_normals(std::move(m));
}

}  // namespace

TEST_CASE("make_view_ring: six-view preset", "[raster]") {
    auto cams = make_view_ring(6);
    REQUIRE(cams.size() == 6);
    REQUIRE(norm(cams[0].position - Vec3d{0, 0, 2}) < 1e-9);    // front
    REQUIRE(norm(cams[1].position - Vec3d{0, 0, -2}) < 1e-9);   // back
    REQUIRE(norm(cams[2].position - Vec3d{2, 0, 0}) < 1e-9);    // left
    REQUIRE(norm(cams[3].position - Vec3d{-2, 0, 0}) < 1e-9);   // right
    REQUIRE(cams[4].position.y == Approx(2 * std::sin(89 * kPi / 180)));
    REQUIRE(cams[5].position.y == Approx(-2 * std::sin(89 * kPi / 180)));
    for (const auto& c : cams) {
        REQUIRE(norm(c.position) == Approx(2.0).margin(1e-9));
        REQUIRE(norm(c.look_at) == Approx(0.0).margin(1e-12));
        c.validate();
    }
}

TEST_CASE("make_view_ring: single front camera", "[raster]") {
    auto cams = make_view_ring(1, {}, 2.5);
    REQUIRE(cams.size() == 1);
    REQUIRE(norm(cams[0].position - Vec3d{0, 0, 2.5}) < 1e-9);
}

TEST_CASE("project: on-axis point lands at image center", "[raster]") {
    Camera c = front_camera(100);
    auto pr = project(c, {0, 0, 0});
    REQUIRE(pr);
    REQUIRE(pr->pixel.x == Approx(50.0));
    REQUIRE(pr->pixel.y == Approx(50.0));
    REQUIRE(pr->depth == Approx(2.0));
}

TEST_CASE("project: behind camera signals", "[raster]") {
    Camera c = front_camera();
    REQUIRE_FALSE(project(c, {0, 0, 3}));
}

TEST_CASE("project: 90 degree fov oracle", "[raster]") {
    // Closed-form pinhole: camera at (0,0,1), 90deg vfov, 100x100; the point
    // (0,0.5,0) is half the frustum half-height up, so a quarter from the top.
    Camera c;
    c.position = {0, 0, 1};
    c.look_at = {0, 0, 0};
    c.vertical_fov = kPi / 2;
    c.width = c.height = 100;
    auto pr = project(c, {0, 0.5, 0});
    REQUIRE(pr);
    REQUIRE(pr->pixel.x == Approx(50.0));
    REQUIRE(pr->pixel.y == Approx(25.0));
}

TEST_CASE("render_gbuffer: mesh outside frustum", "[raster]") {
    Mesh m = two_quads(0, -1);
    for (auto& v : m.vertices) v.x += 100;  // far off axis
    m = compute_normals(std::move(m));
    GBuffer gb = render_gbuffer(m, front_camera());
    for (uint8_t f : gb.mask) REQUIRE(f == 0);
}

TEST_CASE("render_gbuffer: facing quad fills frame with unit normals", "[raster]") {
    Mesh m = two_quads(0, -5);
    Camera c = front_camera(32);
    c.vertical_fov = 20 * kPi / 180;  // tight fov: the quad covers the frame
    GBuffer gb = render_gbuffer(m, c);
    size_t fg = 0;
    for (int y = 0; y < gb.height; ++y)
        for (int x = 0; x < gb.width; ++x) {
            if (!gb.foreground(x, y)) continue;
            ++fg;
            REQUIRE(gb.normal[gb.index(x, y)].z == Approx(1.0).margin(1e-9));
        }
    REQUIRE(fg == size_t(32 * 32));
}

TEST_CASE("render_gbuffer: z-test keeps the nearer quad", "[raster]") {
    Mesh m = two_quads(/*z_near=*/1.0, /*z_far=*/0.0);
    Camera c = front_camera(48);
    GBuffer gb = render_gbuffer(m, c);
    // Faces 2 and 3 are the near quad (added second).
    size_t covered = 0;
    for (size_t i = 0; i < gb.mask.size(); ++i) {
        if (!gb.mask[i]) continue;
        ++covered;
        REQUIRE(gb.face[i] >= 2);
        REQUIRE(gb.depth[i] == Approx(1.0).margin(1e-9));
    }
    REQUIRE(covered > 0);
}

TEST_CASE("render_gbuffer: foreground positions reproject to their pixels", "[raster]") {
    Mesh m = compute_normals(normalize_mesh(make_uv_sphere(32, 24)));
    Camera c = front_camera(96);
    GBuffer gb = render_gbuffer(m, c);
    size_t fg = 0, ok = 0;
    for (int y = 0; y < gb.height; ++y)
        for (int x = 0; x < gb.width; ++x) {
            if (!gb.foreground(x, y)) continue;
            ++fg;
            auto pr = project(c, gb.position[gb.index(x, y)]);
            REQUIRE(pr);
            if (std::abs(pr->pixel.x - (x + 0.5)) <= 0.5 && std::abs(pr->pixel.y - (y + 0.5)) <= 0.5) ++ok;
            REQUIRE(std::abs(pr->depth - gb.depth[gb.index(x, y)]) < 1e-9);
        }
    REQUIRE(fg > 1000);
    REQUIRE(ok == fg);
}

TEST_CASE("render_gbuffer: deterministic across runs and workers", "[raster]") {
    Mesh m = compute_normals(normalize_mesh(make_torus(24, 12)));
    Camera c = front_camera(64);
    GBuffer a = render_gbuffer(m, c, 1);
    GBuffer b = render_gbuffer(m, c, 4);
    REQUIRE(a.depth == b.depth);
    REQUIRE(a.face == b.face);
    REQUIRE(a.mask == b.mask);
}

TEST_CASE("shared triangle edge rasterizes exactly once", "[raster]") {
    Mesh m = two_quads(0, -5);
    m.faces.resize(2);  // keep only the first quad (two triangles, shared diagonal)
    m.face_uv_indices.resize(2);
    m = compute_normals(std::move(m));
    Camera c = front_camera(33);  // odd size puts pixel centers on the diagonal
    auto tris = detail::setup_triangles(m, c);
    std::vector<int> hits(size_t(c.width) * c.height, 0);
    detail::scan_triangles(tris, c.width, 0, c.height,
                           [&](int x, int y, uint32_t, const Vec3d&, double) { hits[size_t(y) * c.width + x]++; });
    for (int v : hits) REQUIRE(v <= 1);
}

TEST_CASE("render_textured: constant texture colors all foreground", "[raster]") {
    Mesh m = compute_normals(normalize_mesh(make_uv_sphere(24, 16)));
    Texture tex = stxtest::constant_texture(32, 32, {1, 0, 0});
    Camera c = front_camera(64);
    RenderStats stats;
    std::vector<uint8_t> mask;
    ImageRGB img = render_textured(m, tex, c, &stats, &mask);
    REQUIRE(stats.invalid_texel_pixels == 0);
    size_t fg = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (mask[size_t(y) * img.width + x]) {
                ++fg;
                REQUIRE(img.at(x, y).x == Approx(1.0));
                REQUIRE(img.at(x, y).y == Approx(0.0));
            }
    REQUIRE(fg > 500);
}

TEST_CASE("render_textured: checkerboard quadrants align head-on", "[raster]") {
    Mesh m = stxtest::make_square_mesh();
    m = compute_normals(std::move(m));
    Texture tex(2, 2);
    tex.set(0, 0, {1, 0, 0});
    tex.set(1, 0, {0, 1, 0});
    tex.set(0, 1, {0, 0, 1});
    tex.set(1, 1, {1, 1, 0});
    Camera c = front_camera(64);
    c.vertical_fov = 2.0 * std::atan(0.5 / 2.0);  // quad exactly fills the frame
    ImageRGB img = render_textured(m, tex, c);
    // Image y is down, v is up: top-left image quadrant is uv (0..0.5, 0.5..1).
    REQUIRE(norm(to_d(img.at(16, 16)) - Vec3d{0, 0, 1}) < 1e-6);
    REQUIRE(norm(to_d(img.at(48, 16)) - Vec3d{1, 1, 0}) < 1e-6);
    REQUIRE(norm(to_d(img.at(16, 48)) - Vec3d{1, 0, 0}) < 1e-6);
    REQUIRE(norm(to_d(img.at(48, 48)) - Vec3d{0, 1, 0}) < 1e-6);
}

TEST_CASE("render_textured: unfilled texels become magenta and counted", "[raster]") {
    Mesh m = compute_normals(stxtest::make_square_mesh());
    Texture tex(8, 8);  // nothing filled
    tex.set(0, 0, {0.5, 0.5, 0.5});
    Camera c = front_camera(32);
    RenderStats stats;
    ImageRGB img = render_textured(m, tex, c, &stats);
    REQUIRE(stats.invalid_texel_pixels > 0);
}

TEST_CASE("gbuffer STXG round trip and depth png", "[raster][formats]") {
    Mesh m = compute_normals(normalize_mesh(make_uv_sphere(16, 12)));
    Camera c = front_camera(32);
    GBuffer gb = render_gbuffer(m, c);
    std::string dir = stxtest::temp_dir("stxg");
    save_gbuffer(gb, dir + "/v.stxg");
    GBuffer r = load_gbuffer(dir + "/v.stxg");
    REQUIRE(r.width == gb.width);
    REQUIRE(r.mask == gb.mask);
    REQUIRE(r.face == gb.face);
    save_depth_png(gb, c, dir + "/d.png");
    ImageRGB d = load_png(dir + "/d.png");
    REQUIRE(d.width == 32);
    // Background maps to 0, foreground strictly brighter.
    bool any_fg = false;
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x) {
            if (gb.foreground(x, y)) {
                REQUIRE(d.at(x, y).x > 0.1f);
                any_fg = true;
            } else {
                REQUIRE(d.at(x, y).x == 0.0f);
            }
        }
    REQUIRE(any_fg);
}

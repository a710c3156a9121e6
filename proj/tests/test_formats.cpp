#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "stx/manifest.hpp"
#include "stx/stx.hpp"
#include "test_util.hpp"

using namespace stx;
using Catch::Approx;

TEST_CASE("texture: png and stxt round trips", "[formats]") {
    std::string dir = stxtest::temp_dir("texio");
    Texture t(16, 16);
    Rng rng(3);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i)
            if ((i + j) % 3) t.set(i, j, {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())});

    save_texture_stxt(t, dir + "/t.stxt");
    Texture r = load_texture_stxt(dir + "/t.stxt");
    REQUIRE(r.texels == t.texels);  // f32 lossless
    REQUIRE(r.filled == t.filled);

    save_texture_png(t, dir + "/t.png");
    Texture p = load_texture_png(dir + "/t.png");
    REQUIRE(p.width == 16);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) {
            REQUIRE(std::abs(p.at(i, j).x - t.at(i, j).x) <= 0.5f / 255.0f + 1e-6f);
            REQUIRE(std::abs(p.at(i, j).z - t.at(i, j).z) <= 0.5f / 255.0f + 1e-6f);
        }
}

TEST_CASE("png: masked save keeps alpha as foreground", "[formats]") {
    std::string dir = stxtest::temp_dir("pngmask");
    ImageRGB img(8, 8, {0.5f, 0.25f, 1.0f});
    std::vector<uint8_t> mask(64, 0);
    for (int i = 0; i < 32; ++i) mask[size_t(i)] = 255;
    save_png_masked(dir + "/m.png", img, mask);
    std::vector<uint8_t> mask_in;
    ImageRGB r = load_png(dir + "/m.png", &mask_in);
    REQUIRE(r.width == 8);
    for (int i = 0; i < 64; ++i) REQUIRE((mask_in[size_t(i)] != 0) == (i < 32));
}

TEST_CASE("binary formats: magic mismatch and truncation error", "[formats]") {
    std::string dir = stxtest::temp_dir("badbin");
    {
        std::ofstream out(dir + "/bad.stxm", std::ios::binary);
        out << "NOPE1234";
    }
    REQUIRE_THROWS_AS(load_texel_map(dir + "/bad.stxm"), Error);
    {
        std::ofstream out(dir + "/short.stxg", std::ios::binary);
        out << "STXG";
    }
    REQUIRE_THROWS_AS(load_gbuffer(dir + "/short.stxg"), Error);
    REQUIRE_THROWS_AS(load_texture_stxt(dir + "/missing.stxt"), Error);
}

TEST_CASE("camera json round trip", "[formats]") {
    Camera c;
    c.position = {1, 2, 3};
    c.look_at = {0, 0.5, 0};
    c.vertical_fov = 0.7;
    c.width = 320;
    c.height = 240;
    c.name = "test";
    Camera r = camera_from_json(camera_to_json(c));
    REQUIRE(norm(r.position - c.position) < 1e-12);
    REQUIRE(norm(r.look_at - c.look_at) < 1e-12);
    REQUIRE(r.vertical_fov == Approx(c.vertical_fov));
    REQUIRE(r.width == 320);
    REQUIRE(r.name == "test");
}

TEST_CASE("camera file: array or object form, validation errors", "[formats]") {
    std::string dir = stxtest::temp_dir("camfile");
    {
        std::ofstream out(dir + "/cams.json");
        out << R"([{"position":[0,0,2],"look_at":[0,0,0]},{"position":[2,0,0],"look_at":[0,0,0]}])";
    }
    auto cams = load_camera_file(dir + "/cams.json");
    REQUIRE(cams.size() == 2);
    {
        std::ofstream out(dir + "/bad.json");
        out << R"([{"position":[0,0,2],"look_at":[0,0,2]}])";  // position == look_at
    }
    REQUIRE_THROWS_AS(load_camera_file(dir + "/bad.json"), Error);
}

TEST_CASE("views manifest round trip", "[formats]") {
    std::string dir = stxtest::temp_dir("manifest");
    ViewsManifest m;
    m.mesh = "shape.obj";
    for (int i = 0; i < 2; ++i) {
        ViewsManifestEntry e;
        e.id = i;
        e.camera = make_view_ring(6)[size_t(i)];
        e.depth_png = strprintf("depth_%03d.png", i);
        e.gbuffer = strprintf("view_%03d.stxg", i);
        e.image = strprintf("view_%03d.png", i);
        m.views.push_back(e);
    }
    save_views_manifest(m, dir + "/manifest.json");
    ViewsManifest r = load_views_manifest(dir + "/manifest.json");
    REQUIRE(r.mesh == "shape.obj");
    REQUIRE(r.views.size() == 2);
    REQUIRE(r.views[1].image == "view_001.png");
    REQUIRE(norm(r.views[0].camera.position - m.views[0].camera.position) < 1e-12);
}

TEST_CASE("stx cli binary formats are self-describing", "[formats]") {
    // Spot-check that the magic strings land at byte 0 of each format.
    std::string dir = stxtest::temp_dir("magics");
    Mesh mesh = compute_normals(stxtest::make_square_mesh());
    TexelMap map = build_texel_map(mesh, 4, 4);
    save_texel_map(map, dir + "/m.stxm");
    std::ifstream in(dir + "/m.stxm", std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    REQUIRE(std::string(magic, 4) == "STXM");
}

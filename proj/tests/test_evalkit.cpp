#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "stx/backproject.hpp"
#include "stx/evalkit.hpp"
#include "stx/primitives.hpp"
#include "stx/rng.hpp"
#include "stx/trainer.hpp"
#include "test_util.hpp"

using namespace stx;
using Catch::Approx;

TEST_CASE("l1_texture_error: identity, opposite, arithmetic oracle", "[evalkit]") {
    Texture white = stxtest::constant_texture(8, 8, {1, 1, 1});
    Texture black = stxtest::constant_texture(8, 8, {0, 0, 0});
    REQUIRE(l1_texture_error(white, white) == 0.0);
    REQUIRE(l1_texture_error(black, white) == Approx(1.0));

    // Half the texels off by 0.5, rest exact -> 0.25.
    Texture pred = white;
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 4; ++i) pred.set(i, j, {0.5f, 0.5f, 0.5f});
    REQUIRE(l1_texture_error(pred, white) == Approx(0.25));

    Texture other(4, 4);
    REQUIRE_THROWS_AS(l1_texture_error(other, white), Error);
}

TEST_CASE("l1_texture_error: triangle inequality", "[evalkit]") {
    Rng rng(5);
    Texture a(8, 8), b(8, 8), c(8, 8);
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i) {
            a.set(i, j, {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())});
            b.set(i, j, {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())});
            c.set(i, j, {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())});
        }
    REQUIRE(l1_texture_error(a, c) <= l1_texture_error(a, b) + l1_texture_error(b, c) + 1e-9);
}

TEST_CASE("psnr: exact match saturates, known mse", "[evalkit]") {
    Texture a = stxtest::constant_texture(4, 4, {0.5f, 0.5f, 0.5f});
    REQUIRE(psnr(a, a) == 99.0);
    Texture b = stxtest::constant_texture(4, 4, {0.6f, 0.5f, 0.5f});
    // mse = (0.1^2)/3
    REQUIRE(psnr(b, a) == Approx(10.0 * std::log10(3.0 / 0.01)).epsilon(1e-4));
}

TEST_CASE("coverage: full, empty, fractional", "[evalkit]") {
    Mesh mesh = compute_normals(stxtest::make_square_mesh());
    TexelMap map = build_texel_map(mesh, 8, 8);
    Texture full = stxtest::constant_texture(8, 8, {1, 1, 1});
    REQUIRE(coverage(full, map) == 1.0);
    Texture none(8, 8);
    REQUIRE(coverage(none, map) == 0.0);
    Texture half(8, 8);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 8; ++i) half.set(i, j, {1, 0, 0});
    REQUIRE(coverage(half, map) == Approx(0.5));
}

TEST_CASE("seam graph: single-chart grid has no seams", "[evalkit]") {
    Mesh mesh = compute_normals(make_grid(6));
    TexelMap map = build_texel_map(mesh, 32, 32);
    SeamGraph g = build_seam_graph(mesh, map);
    REQUIRE(g.pairs.empty());
    REQUIRE(g.seam_edge_count == 0);
}

TEST_CASE("seam graph: cube has 12 seam edge groups", "[evalkit]") {
    Mesh mesh = compute_normals(normalize_mesh(make_cube()));
    TexelMap map = build_texel_map(mesh, 96, 96);
    SeamGraph g = build_seam_graph(mesh, map);
    REQUIRE(g.seam_edge_count == 12);
    REQUIRE_FALSE(g.pairs.empty());
    // Pairs are never UV-adjacent and always cross charts.
    std::vector<uint32_t> chart = texel_chart_ids(mesh, map);
    for (const auto& p : g.pairs) {
        REQUIRE(chart[p.a] != chart[p.b]);
        int ax = int(p.a % 96), ay = int(p.a / 96), bx = int(p.b % 96), by = int(p.b / 96);
        REQUIRE((std::abs(ax - bx) > 1 || std::abs(ay - by) > 1));
    }
}

namespace {

// Open cylinder around the y axis: one rectangular chart with a single
// vertical UV cut at azimuth 0.
Mesh make_open_cylinder(int seg = 24) {
    Mesh m;
    const double pi = 3.14159265358979323846;
    for (int j = 0; j <= 1; ++j)
        for (int i = 0; i < seg; ++i) {
            double a = 2 * pi * i / seg;
            m.vertices.push_back({0.3 * std::sin(a), j ? 0.25 : -0.25, 0.3 * std::cos(a)});
        }
    for (int j = 0; j <= 1; ++j)
        for (int i = 0; i <= seg; ++i) m.uv_coords.push_back({double(i) / seg, j ? 0.9 : 0.1});
    auto vid = [&](int i, int j) { return uint32_t(j * seg + (i % seg)); };
    auto tid = [&](int i, int j) { return uint32_t(j * (seg + 1) + i); };
    for (int i = 0; i < seg; ++i) {
        m.faces.push_back({vid(i, 0), vid(i + 1, 0), vid(i + 1, 1)});
        m.face_uv_indices.push_back({tid(i, 0), tid(i + 1, 0), tid(i + 1, 1)});
        m.faces.push_back({vid(i, 0), vid(i + 1, 1), vid(i, 1)});
        m.face_uv_indices.push_back({tid(i, 0), tid(i + 1, 1), tid(i, 1)});
    }
    return compute_normals(std::move(m));
}

}  // namespace

TEST_CASE("seam graph: cylinder pairs sit along its one cut", "[evalkit]") {
    Mesh mesh = make_open_cylinder();
    TexelMap map = build_texel_map(mesh, 64, 64);
    SeamGraph g = build_seam_graph(mesh, map);
    REQUIRE(g.seam_edge_count == 1);  // the vertical cut is one mesh edge
    REQUIRE_FALSE(g.pairs.empty());
    for (const auto& p : g.pairs) {
        int ax = int(p.a % 64), bx = int(p.b % 64);
        bool a_left = ax <= 2, a_right = ax >= 61;
        bool b_left = bx <= 2, b_right = bx >= 61;
        REQUIRE((a_left || a_right));
        REQUIRE((b_left || b_right));
        REQUIRE(a_left != b_left);  // opposite sides of the cut
    }
}

TEST_CASE("seam energy: constant texture scores zero; pair order irrelevant", "[evalkit]") {
    Mesh mesh = compute_normals(normalize_mesh(make_cube()));
    TexelMap map = build_texel_map(mesh, 64, 64);
    SeamGraph g = build_seam_graph(mesh, map);
    Texture tex = stxtest::constant_texture(64, 64, {0.3f, 0.6f, 0.9f});
    REQUIRE(seam_energy(tex, g) == 0.0);

    Rng rng(9);
    Texture noisy(64, 64);
    for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i) noisy.set(i, j, {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())});
    double e1 = seam_energy(noisy, g);
    SeamGraph shuffled = g;
    Rng rng2(10);
    rng2.shuffle(shuffled.pairs);
    REQUIRE(seam_energy(noisy, shuffled) == Approx(e1).margin(1e-12));
}

TEST_CASE("seam energy: per-chart cube colors match the hand-computed mean", "[evalkit]") {
    Mesh mesh = compute_normals(normalize_mesh(make_cube()));
    TexelMap map = build_texel_map(mesh, 96, 96);
    SeamGraph g = build_seam_graph(mesh, map);
    std::vector<uint32_t> chart = texel_chart_ids(mesh, map);

    // Chart order follows face order: +x, -x, +y, -y, +z, -z.
    std::vector<Vec3f> colors{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
    Texture tex(96, 96);
    for (size_t t = 0; t < map.entries.size(); ++t)
        if (map.entries[t].valid) tex.set(int(t % 96), int(t / 96), colors[chart[t]]);

    // Hand enumeration of the 12 cube-face adjacencies (every pair of faces
    // except opposite ones), all edges equal length.
    int adj[12][2] = {{0, 2}, {0, 3}, {0, 4}, {0, 5}, {1, 2}, {1, 3},
                      {1, 4}, {1, 5}, {2, 4}, {2, 5}, {3, 4}, {3, 5}};
    double expect = 0;
    for (auto& e : adj) {
        Vec3f d = colors[size_t(e[0])] - colors[size_t(e[1])];
        expect += (std::abs(d.x) + std::abs(d.y) + std::abs(d.z)) / 3.0;
    }
    expect /= 12.0;
    REQUIRE(seam_energy(tex, g) == Approx(expect).epsilon(0.02));
}

TEST_CASE("seam energy: continuous ground-truth texture stays under the 8-bit floor", "[evalkit]") {
    // A gradient painted from 3D positions is continuous across UV cuts, so
    // seam pairs differ by at most a texel footprint of slope. 3x the 2/255
    // quantization floor is the locked bound.
    for (auto kind : {SceneKind::sphere, SceneKind::torus, SceneKind::cube}) {
        Mesh mesh;
        switch (kind) {
            case SceneKind::sphere: mesh = make_uv_sphere(); break;
            case SceneKind::torus: mesh = make_torus(); break;
            default: mesh = make_cube(); break;
        }
        mesh = compute_normals(normalize_mesh(mesh));
        TexelMap map = build_texel_map(mesh, 128, 128);
        Texture tex = paint_texture(map, Pattern::gradient, 77);
        SeamGraph g = build_seam_graph(mesh, map);
        if (g.pairs.empty()) continue;
        REQUIRE(seam_energy(tex, g) < 3.0 * 2.0 / 255.0);
    }
}

TEST_CASE("seam energy: skipped pairs counted when texels are empty", "[evalkit]") {
    Mesh mesh = compute_normals(normalize_mesh(make_cube()));
    TexelMap map = build_texel_map(mesh, 64, 64);
    SeamGraph g = build_seam_graph(mesh, map);
    Texture tex(64, 64);  // everything empty
    size_t skipped = 0;
    REQUIRE(seam_energy(tex, g, &skipped) == 0.0);
    REQUIRE(skipped == g.pairs.size());
}

TEST_CASE("eval csv: header-only when empty, rows otherwise", "[evalkit][formats]") {
    std::string dir = stxtest::temp_dir("csv");
    write_eval_csv({}, dir + "/empty.csv");
    std::ifstream in(dir + "/empty.csv");
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "scene,strategy,K,geodesics,thr,L1,PSNR,seam_energy,coverage,wall_time_ms");
    REQUIRE_FALSE(std::getline(in, line));

    EvalRow row;
    row.scene = "s";
    row.strategy = "average";
    write_eval_csv({row}, dir + "/one.csv");
    std::ifstream in2(dir + "/one.csv");
    std::getline(in2, line);
    REQUIRE(std::getline(in2, line));
    REQUIRE(line.find("s,average,3,on") == 0);
}

#include <catch2/catch_amalgamated.hpp>

#include "stx/mesh.hpp"
#include "stx/primitives.hpp"
#include "stx/texelmap.hpp"
#include "test_util.hpp"

using namespace stx;
using Catch::Approx;

TEST_CASE("load_mesh: single triangle", "[mesh]") {
    Mesh m = stxtest::mesh_from_obj(stxtest::kSingleTriangleObj);
    REQUIRE(m.faces.size() == 1);
    REQUIRE(m.vertices.size() == 3);
    REQUIRE(m.uv_coords.size() == 3);
}

TEST_CASE("load_mesh: quads fan-triangulate", "[mesh]") {
    Mesh m = stxtest::mesh_from_obj(stxtest::kUnitCubeObj);
    REQUIRE(m.vertices.size() == 8);
    REQUIRE(m.faces.size() == 12);
}

TEST_CASE("load_mesh: vertex index out of range", "[mesh]") {
    std::string bad =
        "v 0 0 0\nv 1 0 0\nv 0 1 0\n"
        "vt 0 0\nvt 1 0\nvt 0 1\n"
        "f 1/1 2/2 99/3\n";
    REQUIRE_THROWS_AS(stxtest::mesh_from_obj(bad), Error);
}

TEST_CASE("load_mesh: missing texcoords is an atlas error", "[mesh]") {
    std::string no_vt = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    REQUIRE_THROWS_WITH(stxtest::mesh_from_obj(no_vt), Catch::Matchers::ContainsSubstring("atlas required"));
}

TEST_CASE("load_mesh: non-manifold accepted with warning", "[mesh]") {
    std::string three_faces_one_edge =
        "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nv 0 -1 0\n"
        "vt 0 0\nvt 1 0\nvt 0 1\n"
        "f 1/1 2/2 3/3\n"
        "f 1/1 2/2 4/3\n"
        "f 1/1 2/2 5/3\n";
    Mesh m = stxtest::mesh_from_obj(three_faces_one_edge);
    REQUIRE(m.non_manifold);
}

TEST_CASE("compute_normals: planar square", "[mesh]") {
    Mesh m = compute_normals(stxtest::make_square_mesh());
    for (const auto& n : m.vertex_normals) {
        REQUIRE(n.x == Approx(0).margin(1e-12));
        REQUIRE(n.y == Approx(0).margin(1e-12));
        REQUIRE(n.z == Approx(1).margin(1e-12));
    }
}

TEST_CASE("compute_normals: octahedron matches area-weighted oracle", "[mesh]") {
    // Regular octahedron: the area-weighted normal at each vertex is the
    // normalized vertex position. Cross-check against a brute-force
    // accumulation done independently here.
    std::string obj =
        "v 1 0 0\nv -1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nv 0 0 -1\n"
        "vt 0 0\nvt 1 0\nvt 0 1\n"
        "f 1/1 3/2 5/3\nf 3/1 2/2 5/3\nf 2/1 4/2 5/3\nf 4/1 1/2 5/3\n"
        "f 3/1 1/2 6/3\nf 2/1 3/2 6/3\nf 4/1 2/2 6/3\nf 1/1 4/2 6/3\n";
    Mesh m = stxtest::mesh_from_obj(obj);

    std::vector<Vec3d> oracle(m.vertices.size(), {0, 0, 0});
    for (const auto& f : m.faces) {
        Vec3d e1 = m.vertices[f[1]] - m.vertices[f[0]];
        Vec3d e2 = m.vertices[f[2]] - m.vertices[f[0]];
        Vec3d weighted = cross(e1, e2);  // 2*area*unit normal
        for (int k = 0; k < 3; ++k) oracle[f[k]] += weighted;
    }
    m = compute_normals(m);
    for (size_t v = 0; v < m.vertices.size(); ++v) {
        Vec3d expect = normalized(oracle[v]);
        REQUIRE(norm(m.vertex_normals[v] - expect) < 1e-12);
        REQUIRE(norm(m.vertex_normals[v] - normalized(m.vertices[v])) < 1e-12);
        REQUIRE(norm(m.vertex_normals[v]) == Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("compute_normals: degenerate face contributes nothing", "[mesh]") {
    std::string obj =
        "v 0 0 0\nv 1 0 0\nv 0 1 0\n"
        "vt 0 0\nvt 1 0\nvt 0 1\n"
        "f 1/1 2/2 3/3\n"
        "f 1/1 2/2 2/3\n";  // zero area
    Mesh m = compute_normals(stxtest::mesh_from_obj(obj));
    for (int k = 0; k < 3; ++k) REQUIRE(m.vertex_normals[size_t(k)].z == Approx(1).margin(1e-12));
}

TEST_CASE("normalize_mesh: 1D extent", "[mesh]") {
    Mesh m;
    m.vertices = {{0, 0, 0}, {2, 0, 0}};
    m.faces = {{0, 1, 1}};
    m.face_uv_indices = {{0, 0, 0}};
    m.uv_coords = {{0, 0}};
    Mesh n = normalize_mesh(m);
    REQUIRE(n.vertices[0].x == Approx(-0.5));
    REQUIRE(n.vertices[1].x == Approx(0.5));
}

TEST_CASE("normalize_mesh: anisotropic box oracle", "[mesh]") {
    Mesh m;
    m.vertices = {{10, 10, 10}, {12, 11, 10.5}};
    Mesh n = normalize_mesh(m);
    Vec3d lo = n.vertices[0], hi = n.vertices[1];
    REQUIRE(hi.x - lo.x == Approx(1.0).margin(1e-9));
    REQUIRE(hi.y - lo.y == Approx(0.5).margin(1e-9));
    REQUIRE(hi.z - lo.z == Approx(0.25).margin(1e-9));
    REQUIRE((lo.x + hi.x) * 0.5 == Approx(0).margin(1e-9));
    REQUIRE((lo.y + hi.y) * 0.5 == Approx(0).margin(1e-9));
}

TEST_CASE("normalize_mesh: idempotent and in-bounds", "[mesh]") {
    Mesh m = normalize_mesh(compute_normals(stxtest::mesh_from_obj(stxtest::kUnitCubeObj)));
    for (const auto& v : m.vertices) {
        REQUIRE(v.x >= -0.5 - 1e-6);
        REQUIRE(v.x <= 0.5 + 1e-6);
        REQUIRE(v.y >= -0.5 - 1e-6);
        REQUIRE(v.z <= 0.5 + 1e-6);
    }
    Mesh again = normalize_mesh(m);
    for (size_t i = 0; i < m.vertices.size(); ++i) REQUIRE(norm(again.vertices[i] - m.vertices[i]) < 1e-6);
}

TEST_CASE("normalize_mesh: degenerate extent error", "[mesh]") {
    Mesh m;
    m.vertices = {{1, 1, 1}, {1, 1, 1}};
    REQUIRE_THROWS_AS(normalize_mesh(m), Error);
}

TEST_CASE("build_texel_map: planar face positions on plane", "[mesh]") {
    Mesh m = compute_normals(stxtest::make_square_mesh());
    TexelMap map = build_texel_map(m, 16, 16);
    size_t valid = 0;
    for (const auto& e : map.entries) {
        if (!e.valid) continue;
        ++valid;
        REQUIRE(std::abs(e.position.z) < 1e-6);
    }
    REQUIRE(valid == 16 * 16);  // full square covered
}

TEST_CASE("build_texel_map: lower-left half triangle covers 10 of 16 texels", "[mesh]") {
    Mesh m = compute_normals(stxtest::mesh_from_obj(stxtest::kSingleTriangleObj));
    TexelMap map = build_texel_map(m, 4, 4);

    // Brute-force point-in-triangle oracle over all 16 texel centers,
    // counting the boundary as inside (the rasterizer owns the hypotenuse
    // here since no other face claims it).
    size_t oracle = 0;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) {
            double u = (i + 0.5) / 4, v = (j + 0.5) / 4;
            if (u >= 0 && v >= 0 && u + v <= 1.0) ++oracle;
        }
    REQUIRE(oracle == 10);
    REQUIRE(map.valid_count() == oracle);
}

TEST_CASE("build_texel_map: chart boundary texel assigned to exactly one face", "[mesh]") {
    // Shared diagonal passes exactly through texel centers of an 8x8 map.
    Mesh m = compute_normals(stxtest::make_square_mesh());
    TexelMap map = build_texel_map(m, 8, 8);
    AtlasReport report;
    build_texel_map(m, 8, 8, &report);
    REQUIRE(report.overlap_texel_count == 0);
    for (int d = 0; d < 8; ++d) {
        const TexelEntry& e = map.at(d, d);  // centers on the diagonal u == v
        REQUIRE(e.valid);
    }
    REQUIRE(map.valid_count() == 64);
}

TEST_CASE("build_texel_map: round-trip and barycentric invariants", "[mesh]") {
    Mesh m = compute_normals(normalize_mesh(make_torus(24, 12)));
    TexelMap map = build_texel_map(m, 64, 64);
    REQUIRE(map.valid_count() > 0);
    for (int j = 0; j < map.height; ++j)
        for (int i = 0; i < map.width; ++i) {
            const TexelEntry& e = map.at(i, j);
            if (!e.valid) continue;
            REQUIRE(e.bary.x >= -1e-6);
            REQUIRE(e.bary.y >= -1e-6);
            REQUIRE(e.bary.z >= -1e-6);
            REQUIRE(e.bary.x + e.bary.y + e.bary.z == Approx(1.0).margin(1e-6));
            // Position equals the barycentric combination of the face corners.
            REQUIRE(norm(e.position - m.face_point(e.face, e.bary)) < 1e-6);
            // Reprojection through the face's UV corners recovers the center.
            const auto& uvs = m.face_uv_indices[e.face];
            Vec2d uv = m.uv_coords[uvs[0]] * e.bary.x + m.uv_coords[uvs[1]] * e.bary.y +
                       m.uv_coords[uvs[2]] * e.bary.z;
            Vec2d center = map.texel_center_uv(i, j);
            REQUIRE(std::abs(uv.x - center.x) * map.width <= 0.5);
            REQUIRE(std::abs(uv.y - center.y) * map.height <= 0.5);
            REQUIRE(norm(e.normal) == Approx(1.0).epsilon(1e-6));
        }
}

TEST_CASE("build_texel_map: deterministic and STXM round-trips", "[mesh][formats]") {
    Mesh m = compute_normals(normalize_mesh(make_uv_sphere(24, 16)));
    TexelMap a = build_texel_map(m, 32, 32);
    TexelMap b = build_texel_map(m, 32, 32);
    std::string dir = stxtest::temp_dir("stxm");
    save_texel_map(a, dir + "/a.stxm");
    save_texel_map(b, dir + "/b.stxm");
    REQUIRE(stxtest::file_bytes_equal(dir + "/a.stxm", dir + "/b.stxm"));
    TexelMap c = load_texel_map(dir + "/a.stxm");
    REQUIRE(c.width == a.width);
    REQUIRE(c.valid_count() == a.valid_count());
}

TEST_CASE("atlas report: overlapping charts counted, last writer wins", "[mesh]") {
    // Two faces sharing the same UV triangle.
    std::string obj =
        "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
        "vt 0 0\nvt 1 0\nvt 0 1\n"
        "f 1/1 2/2 3/3\n"
        "f 1/1 2/2 4/3\n";
    Mesh m = compute_normals(stxtest::mesh_from_obj(obj));
    AtlasReport report;
    TexelMap map = build_texel_map(m, 8, 8, &report);
    REQUIRE(report.overlap_texel_count > 0);
    REQUIRE(report.multi_face_uv_reuse);
    for (const auto& e : map.entries)
        if (e.valid) REQUIRE(e.face == 1);  // face-index order, last writer
}

TEST_CASE("uv charts: cube has six, sphere has one", "[mesh]") {
    int charts = 0;
    compute_uv_charts(compute_normals(normalize_mesh(make_cube())), &charts);
    REQUIRE(charts == 6);
    compute_uv_charts(compute_normals(normalize_mesh(make_uv_sphere(16, 12))), &charts);
    REQUIRE(charts == 1);
}

TEST_CASE("save/load mesh round trip", "[mesh][formats]") {
    Mesh m = compute_normals(normalize_mesh(stxtest::mesh_from_obj(stxtest::kUnitCubeObj)));
    std::string dir = stxtest::temp_dir("objio");
    save_mesh(m, dir + "/m.obj");
    Mesh r = load_mesh(dir + "/m.obj");
    REQUIRE(r.vertices.size() == m.vertices.size());
    REQUIRE(r.faces.size() == m.faces.size());
    for (size_t i = 0; i < m.vertices.size(); ++i) REQUIRE(norm(r.vertices[i] - m.vertices[i]) == 0.0);
}

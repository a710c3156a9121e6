#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stx/error.hpp"
#include "stx/rng.hpp"
#include "stx/vec.hpp"

namespace stx {

// Indexed triangle mesh with a per-corner UV atlas. Faces and UV faces are
// parallel arrays: face f uses vertices faces[f] and UV corners
// face_uv_indices[f].
struct Mesh {
    std::vector<Vec3d> vertices;
    std::vector<std::array<uint32_t, 3>> faces;
    std::vector<Vec2d> uv_coords;                       // in [0,1]^2
    std::vector<std::array<uint32_t, 3>> face_uv_indices;
    std::vector<Vec3d> vertex_normals;                  // empty until compute_normals

    bool non_manifold = false;
    std::vector<std::string> warnings;

    size_t vertex_count() const { return vertices.size(); }
    size_t face_count() const { return faces.size(); }
    bool has_normals() const { return vertex_normals.size() == vertices.size(); }

    Vec3d face_point(uint32_t f, const Vec3d& bary) const {
        const auto& tri = faces[f];
        return vertices[tri[0]] * bary.x + vertices[tri[1]] * bary.y + vertices[tri[2]] * bary.z;
    }

    Vec3d face_normal_interp(uint32_t f, const Vec3d& bary) const {
        const auto& tri = faces[f];
        return normalized(vertex_normals[tri[0]] * bary.x + vertex_normals[tri[1]] * bary.y +
                          vertex_normals[tri[2]] * bary.z);
    }

    Vec3d face_geometric_normal(uint32_t f) const {
        const auto& tri = faces[f];
        return normalized(cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]));
    }

    double face_area(uint32_t f) const {
        const auto& tri = faces[f];
        return 0.5 * norm(cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]));
    }

    Vec3d face_centroid(uint32_t f) const {
        const auto& tri = faces[f];
        return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
    }
};

inline void validate_mesh(const Mesh& m) {
    for (size_t f = 0; f < m.faces.size(); ++f)
        for (uint32_t vi : m.faces[f])
            if (vi >= m.vertices.size())
                fail_data(strprintf("face %zu references vertex %u of %zu", f, vi, m.vertices.size()));
    if (m.face_uv_indices.size() != m.faces.size())
        fail_data("mesh has faces without UV corners (atlas required)");
    for (size_t f = 0; f < m.face_uv_indices.size(); ++f)
        for (uint32_t ti : m.face_uv_indices[f])
            if (ti >= m.uv_coords.size())
                fail_data(strprintf("face %zu references UV %u of %zu", f, ti, m.uv_coords.size()));
}

namespace detail {

constexpr int kNoIndex = std::numeric_limits<int>::min();

struct ObjCorner {
    int v = kNoIndex;
    int vt = kNoIndex;
    int vn = kNoIndex;
};

inline ObjCorner parse_corner(const std::string& tok, size_t line_no) {
    ObjCorner c;
    int field = 0;
    size_t pos = 0;
    while (pos <= tok.size() && field < 3) {
        size_t slash = tok.find('/', pos);
        std::string part = tok.substr(pos, slash == std::string::npos ? std::string::npos : slash - pos);
        if (!part.empty()) {
            int idx = 0;
            try {
                idx = std::stoi(part);
            } catch (...) {
                fail_data(strprintf("OBJ line %zu: bad face index '%s'", line_no, tok.c_str()));
            }
            if (field == 0) c.v = idx;
            else if (field == 1) c.vt = idx;
            else c.vn = idx;
        }
        if (slash == std::string::npos) break;
        pos = slash + 1;
        ++field;
    }
    return c;
}

inline uint32_t resolve_index(int idx, size_t count, const char* what, size_t line_no) {
    long r = idx > 0 ? idx - 1 : long(count) + idx;  // OBJ negative indices are relative
    if (r < 0 || size_t(r) >= count)
        fail_data(strprintf("OBJ line %zu: %s index %d out of range (have %zu)", line_no, what, idx, count));
    return uint32_t(r);
}

}  // namespace detail

// Wavefront OBJ subset: v, vt (required on faces), vn optional, f with
// v/vt or v/vt/vn corners; polygons are fan-triangulated at the first corner.
inline Mesh load_mesh(std::istream& in, const std::string& name = "<stream>") {
    Mesh m;
    std::vector<Vec3d> normals;
    std::vector<std::array<uint32_t, 3>> face_normal_indices;
    std::string line;
    size_t line_no = 0;
    bool any_missing_vt = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3d p;
            ss >> p.x >> p.y >> p.z;
            if (ss.fail()) fail_data(strprintf("OBJ line %zu: malformed vertex", line_no));
            m.vertices.push_back(p);
        } else if (tag == "vt") {
            Vec2d t;
            ss >> t.x >> t.y;
            if (ss.fail()) fail_data(strprintf("OBJ line %zu: malformed texcoord", line_no));
            m.uv_coords.push_back(t);
        } else if (tag == "vn") {
            Vec3d n;
            ss >> n.x >> n.y >> n.z;
            normals.push_back(n);
        } else if (tag == "f") {
            std::vector<detail::ObjCorner> corners;
            std::string tok;
            while (ss >> tok) corners.push_back(detail::parse_corner(tok, line_no));
            if (corners.size() < 3) fail_data(strprintf("OBJ line %zu: face with <3 corners", line_no));
            for (size_t i = 1; i + 1 < corners.size(); ++i) {
                std::array<detail::ObjCorner, 3> tri = {corners[0], corners[i], corners[i + 1]};
                std::array<uint32_t, 3> vs{}, ts{}, ns{};
                bool has_vt = true, has_vn = true;
                for (int k = 0; k < 3; ++k) {
                    if (tri[k].v == detail::kNoIndex)
                        fail_data(strprintf("OBJ line %zu: face corner without vertex index", line_no));
                    vs[k] = detail::resolve_index(tri[k].v, m.vertices.size(), "vertex", line_no);
                    if (tri[k].vt != detail::kNoIndex)
                        ts[k] = detail::resolve_index(tri[k].vt, m.uv_coords.size(), "texcoord", line_no);
                    else
                        has_vt = false;
                    if (tri[k].vn != detail::kNoIndex)
                        ns[k] = detail::resolve_index(tri[k].vn, normals.size(), "normal", line_no);
                    else
                        has_vn = false;
                }
                if (!has_vt) {
                    any_missing_vt = true;
                    continue;
                }
                m.faces.push_back(vs);
                m.face_uv_indices.push_back(ts);
                if (has_vn) face_normal_indices.push_back(ns);
            }
        }
        // o/g/s/usemtl/mtllib and anything else: ignored
    }
    if (any_missing_vt || m.uv_coords.empty())
        fail_data("atlas required: OBJ '" + name + "' has faces without vt texcoords");
    if (m.faces.empty()) fail_data("OBJ '" + name + "' contains no faces");
    validate_mesh(m);

    // Adopt per-corner normals only if they cover every face consistently;
    // otherwise callers run compute_normals.
    if (face_normal_indices.size() == m.faces.size() && !normals.empty()) {
        m.vertex_normals.assign(m.vertices.size(), Vec3d{0, 0, 0});
        for (size_t f = 0; f < m.faces.size(); ++f)
            for (int k = 0; k < 3; ++k) m.vertex_normals[m.faces[f][k]] = normals[face_normal_indices[f][k]];
        for (auto& n : m.vertex_normals) n = normalized(n);
    }

    // Non-manifold check: any edge shared by more than two faces.
    std::map<std::pair<uint32_t, uint32_t>, int> edge_count;
    for (const auto& f : m.faces)
        for (int k = 0; k < 3; ++k) {
            uint32_t a = f[k], b = f[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            edge_count[{a, b}]++;
        }
    for (const auto& [e, c] : edge_count)
        if (c > 2) {
            m.non_manifold = true;
            m.warnings.push_back(strprintf("non-manifold edge %u-%u used by %d faces", e.first, e.second, c));
            break;
        }
    return m;
}

inline Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open mesh file: " + path);
    return load_mesh(in, path);
}

inline void save_mesh(const Mesh& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail_data("cannot write mesh file: " + path);
    out << "# stx mesh\n";
    char buf[128];
    for (const auto& v : m.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        out << buf;
    }
    for (const auto& t : m.uv_coords) {
        std::snprintf(buf, sizeof buf, "vt %.17g %.17g\n", t.x, t.y);
        out << buf;
    }
    bool vn = m.has_normals();
    if (vn)
        for (const auto& n : m.vertex_normals) {
            std::snprintf(buf, sizeof buf, "vn %.17g %.17g %.17g\n", n.x, n.y, n.z);
            out << buf;
        }
    for (size_t f = 0; f < m.faces.size(); ++f) {
        out << "f";
        for (int k = 0; k < 3; ++k) {
            uint32_t v = m.faces[f][k] + 1, t = m.face_uv_indices[f][k] + 1;
            if (vn)
                out << ' ' << v << '/' << t << '/' << v;
            else
                out << ' ' << v << '/' << t;
        }
        out << '\n';
    }
    if (!out) fail_data("write failed: " + path);
}

// Area-weighted vertex normals. Zero-area faces contribute nothing; vertices
// with no incident area get (0,0,1) and a warning.
inline Mesh compute_normals(Mesh mesh) {
    mesh.vertex_normals.assign(mesh.vertices.size(), Vec3d{0, 0, 0});
    for (const auto& f : mesh.faces) {
        Vec3d n = cross(mesh.vertices[f[1]] - mesh.vertices[f[0]], mesh.vertices[f[2]] - mesh.vertices[f[0]]);
        // |n| = 2*area, so summing unnormalized face normals is the area weighting
        mesh.vertex_normals[f[0]] += n;
        mesh.vertex_normals[f[1]] += n;
        mesh.vertex_normals[f[2]] += n;
    }
    size_t isolated = 0;
    for (auto& n : mesh.vertex_normals) {
        double len = norm(n);
        if (len < 1e-20) {
            n = {0, 0, 1};
            ++isolated;
        } else {
            n = n / len;
        }
    }
    if (isolated > 0)
        mesh.warnings.push_back(strprintf("%zu vertices without incident face area; normal set to (0,0,1)", isolated));
    return mesh;
}

// Translate/uniformly scale into origin-centered [-0.5,0.5]^3 with the
// longest axis spanning exactly 1.
inline Mesh normalize_mesh(Mesh mesh) {
    if (mesh.vertices.empty()) fail_data("normalize_mesh: empty mesh");
    Vec3d lo = mesh.vertices[0], hi = mesh.vertices[0];
    for (const auto& v : mesh.vertices) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
    }
    Vec3d extent = hi - lo;
    double max_extent = std::max({extent.x, extent.y, extent.z});
    if (max_extent < 1e-12) fail_data("normalize_mesh: degenerate extent (all vertices coincident)");
    Vec3d center = (lo + hi) * 0.5;
    double s = 1.0 / max_extent;
    for (auto& v : mesh.vertices) v = (v - center) * s;
    return mesh;
}

// Barycentric coordinates of p with respect to face f, computed in the
// triangle plane. Valid for non-degenerate faces.
inline Vec3d barycentric_of_point(const Mesh& mesh, uint32_t f, const Vec3d& p) {
    const auto& tri = mesh.faces[f];
    Vec3d a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    Vec3d v0 = b - a, v1 = c - a, v2 = p - a;
    double d00 = dot(v0, v0), d01 = dot(v0, v1), d11 = dot(v1, v1);
    double d20 = dot(v2, v0), d21 = dot(v2, v1);
    double denom = d00 * d11 - d01 * d01;
    if (std::abs(denom) < 1e-30) return {1, 0, 0};
    double v = (d11 * d20 - d01 * d21) / denom;
    double w = (d00 * d21 - d01 * d20) / denom;
    return {1.0 - v - w, v, w};
}

inline uint64_t mesh_hash(const Mesh& m) {
    uint64_t h = fnv1a(m.vertices.data(), m.vertices.size() * sizeof(Vec3d));
    h = fnv1a(m.faces.data(), m.faces.size() * sizeof(m.faces[0]), h);
    h = fnv1a(m.uv_coords.data(), m.uv_coords.size() * sizeof(Vec2d), h);
    h = fnv1a(m.face_uv_indices.data(), m.face_uv_indices.size() * sizeof(m.face_uv_indices[0]), h);
    return h;
}

}  // namespace stx

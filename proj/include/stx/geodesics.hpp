#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <vector>

#include "stx/binio.hpp"
#include "stx/mesh.hpp"

namespace stx {

struct SurfacePoint {
    uint32_t face = 0;
    Vec3d bary{1, 0, 0};
};

inline Vec3d surface_position(const Mesh& mesh, const SurfacePoint& p) { return mesh.face_point(p.face, p.bary); }

constexpr double kDegenerateFaceArea = 1e-12;
constexpr double kDefaultGeodesicRadius = 0.15;

// Shortest-path substrate: mesh vertices plus one Steiner node per face
// centroid. Edges: vertex-vertex along mesh edges, vertex-centroid within
// each face, and centroid-centroid across shared edges (the last tightens
// worst-case lattice stretch enough for the 5% accuracy bar). Degenerate
// faces get no edges.
struct EdgeGraph {
    size_t vertex_count = 0;
    size_t node_count = 0;  // vertex_count + face count
    std::vector<uint32_t> offsets;
    std::vector<uint32_t> targets;
    std::vector<double> weights;
    std::vector<uint8_t> face_degenerate;

    size_t undirected_edge_count() const { return targets.size() / 2; }
    uint32_t centroid_node(uint32_t face) const { return uint32_t(vertex_count + face); }
};

inline EdgeGraph build_edge_graph(const Mesh& mesh) {
    EdgeGraph g;
    g.vertex_count = mesh.vertices.size();
    g.node_count = g.vertex_count + mesh.faces.size();
    g.face_degenerate.resize(mesh.faces.size());
    for (uint32_t f = 0; f < mesh.faces.size(); ++f)
        g.face_degenerate[f] = mesh.face_area(f) < kDegenerateFaceArea ? 1 : 0;

    std::vector<std::pair<uint32_t, uint32_t>> edges;  // directed pairs, added once per undirected edge
    std::map<std::pair<uint32_t, uint32_t>, std::vector<uint32_t>> mesh_edges;  // edge -> incident faces
    for (uint32_t f = 0; f < mesh.faces.size(); ++f) {
        if (g.face_degenerate[f]) continue;
        for (int k = 0; k < 3; ++k) {
            uint32_t a = mesh.faces[f][k], b = mesh.faces[f][(k + 1) % 3];
            if (a > b) std::swap(a, b);
            if (a != b) mesh_edges[{a, b}].push_back(f);
        }
        for (int k = 0; k < 3; ++k) edges.push_back({mesh.faces[f][k], g.centroid_node(f)});
    }
    for (const auto& [e, faces] : mesh_edges) {
        edges.push_back({e.first, e.second});
        for (size_t i = 0; i + 1 < faces.size(); ++i)
            for (size_t j = i + 1; j < faces.size(); ++j)
                edges.push_back({g.centroid_node(faces[i]), g.centroid_node(faces[j])});
    }

    auto node_pos = [&](uint32_t n) {
        return n < g.vertex_count ? mesh.vertices[n] : mesh.face_centroid(uint32_t(n - g.vertex_count));
    };
    std::vector<uint32_t> degree(g.node_count, 0);
    for (const auto& [a, b] : edges) {
        ++degree[a];
        ++degree[b];
    }
    g.offsets.assign(g.node_count + 1, 0);
    for (size_t i = 0; i < g.node_count; ++i) g.offsets[i + 1] = g.offsets[i] + degree[i];
    g.targets.resize(edges.size() * 2);
    g.weights.resize(edges.size() * 2);
    std::vector<uint32_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
    for (const auto& [a, b] : edges) {
        double w = norm(node_pos(a) - node_pos(b));
        g.targets[cursor[a]] = b;
        g.weights[cursor[a]++] = w;
        g.targets[cursor[b]] = a;
        g.weights[cursor[b]++] = w;
    }
    return g;
}

// Window-limited distance field from one surface point. Distances are kept
// per mesh vertex; absence means beyond the radius.
struct GeodesicField {
    SurfacePoint source;
    Vec3d source_pos;
    double radius = kDefaultGeodesicRadius;
    std::vector<std::pair<uint32_t, double>> vertex_dist;  // sorted by vertex id

    std::optional<double> vertex_distance(uint32_t v) const {
        auto it = std::lower_bound(vertex_dist.begin(), vertex_dist.end(), v,
                                   [](const auto& p, uint32_t q) { return p.first < q; });
        if (it == vertex_dist.end() || it->first != v) return std::nullopt;
        return it->second;
    }
};

namespace detail {

// Reusable Dijkstra scratch; one per thread.
struct DijkstraScratch {
    std::vector<double> dist;
    std::vector<uint32_t> touched;

    void ensure(size_t n) {
        if (dist.size() < n) dist.resize(n, kInfDouble);
    }
    void reset() {
        for (uint32_t i : touched) dist[i] = kInfDouble;
        touched.clear();
    }
    static constexpr double kInfDouble = std::numeric_limits<double>::infinity();
};

inline DijkstraScratch& dijkstra_scratch() {
    thread_local DijkstraScratch s;
    return s;
}

}  // namespace detail

// Single-source shortest paths truncated at `radius`, seeded at the source
// face's corners and centroid with exact in-plane offsets.
inline GeodesicField geodesic_field(const Mesh& mesh, const EdgeGraph& graph, const SurfacePoint& source,
                                    double radius = kDefaultGeodesicRadius) {
    if (radius <= 0) fail_usage("geodesic_field: radius must be > 0");
    if (source.face >= mesh.faces.size()) fail_data("geodesic_field: source face out of range");
    if (graph.face_degenerate[source.face]) fail_data("geodesic_field: source on degenerate face");

    GeodesicField field;
    field.source = source;
    field.source_pos = surface_position(mesh, source);
    field.radius = radius;

    auto& scratch = detail::dijkstra_scratch();
    scratch.ensure(graph.node_count);
    scratch.reset();

    using Item = std::pair<double, uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    auto seed = [&](uint32_t node, double d) {
        if (d > radius) return;
        if (d < scratch.dist[node]) {
            if (scratch.dist[node] == detail::DijkstraScratch::kInfDouble) scratch.touched.push_back(node);
            scratch.dist[node] = d;
            queue.push({d, node});
        }
    };
    for (int k = 0; k < 3; ++k) {
        uint32_t v = mesh.faces[source.face][k];
        seed(v, norm(mesh.vertices[v] - field.source_pos));
    }
    seed(graph.centroid_node(source.face), norm(mesh.face_centroid(source.face) - field.source_pos));

    while (!queue.empty()) {
        auto [d, n] = queue.top();
        queue.pop();
        if (d > scratch.dist[n]) continue;
        for (uint32_t e = graph.offsets[n]; e < graph.offsets[n + 1]; ++e) {
            uint32_t m = graph.targets[e];
            double nd = d + graph.weights[e];
            if (nd <= radius && nd < scratch.dist[m]) {
                if (scratch.dist[m] == detail::DijkstraScratch::kInfDouble) scratch.touched.push_back(m);
                scratch.dist[m] = nd;
                queue.push({nd, m});
            }
        }
    }

    field.vertex_dist.reserve(scratch.touched.size());
    for (uint32_t n : scratch.touched)
        if (n < graph.vertex_count) field.vertex_dist.push_back({n, scratch.dist[n]});
    std::sort(field.vertex_dist.begin(), field.vertex_dist.end());
    return field;
}

namespace detail {

// Geodesic across one hinge edge (a,b): unfold both faces into a plane and
// measure the straight segment, valid when it actually crosses the edge.
inline std::optional<double> hinge_distance(const Vec3d& s, const Vec3d& t, const Vec3d& a, const Vec3d& b) {
    Vec3d e = b - a;
    double elen = norm(e);
    if (elen < 1e-12) return std::nullopt;
    Vec3d eh = e / elen;
    double xs = dot(s - a, eh), xt = dot(t - a, eh);
    double ys = norm((s - a) - eh * xs);
    double yt = norm((t - a) - eh * xt);
    double ysum = ys + yt;
    if (ysum < 1e-15) return std::abs(xs - xt);
    double xc = xs + (xt - xs) * ys / ysum;  // crossing point along the edge
    if (xc < -1e-9 || xc > elen + 1e-9) return std::nullopt;
    double dx = xs - xt;
    return std::sqrt(dx * dx + ysum * ysum);
}

}  // namespace detail

// Distance at a target point. Same face: direct in-plane distance. One-ring
// faces: edge unfolding (exact for hinge paths) with a through-vertex upper
// bound as fallback. Everywhere else: barycentric interpolation of the target
// face's windowed vertex distances. nullopt = beyond the window.
inline std::optional<double> geodesic_distance(const Mesh& mesh, const GeodesicField& field,
                                               const SurfacePoint& target) {
    if (target.face >= mesh.faces.size()) fail_data("geodesic_distance: target face out of range");
    Vec3d tpos = surface_position(mesh, target);
    if (target.face == field.source.face) {
        double d = norm(tpos - field.source_pos);
        if (d <= field.radius) return d;
        return std::nullopt;
    }

    double best = std::numeric_limits<double>::infinity();
    const auto& sf = mesh.faces[field.source.face];
    const auto& tf = mesh.faces[target.face];
    // Shared edge: unfolded hinge path.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            uint32_t a = sf[i], b = sf[(i + 1) % 3];
            uint32_t c = tf[j], d = tf[(j + 1) % 3];
            if ((a == c && b == d) || (a == d && b == c)) {
                auto h = detail::hinge_distance(field.source_pos, tpos, mesh.vertices[a], mesh.vertices[b]);
                if (h) best = std::min(best, *h);
            }
        }
    // Shared vertices: path through the vertex bounds the geodesic above.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (sf[i] == tf[j]) {
                const Vec3d& v = mesh.vertices[sf[i]];
                best = std::min(best, norm(field.source_pos - v) + norm(v - tpos));
            }

    double acc = 0;
    bool interp_ok = true;
    for (int k = 0; k < 3; ++k) {
        auto d = field.vertex_distance(tf[k]);
        if (!d) {
            interp_ok = false;
            break;
        }
        acc += target.bary[k] * *d;
    }
    if (interp_ok) best = std::min(best, acc);

    if (!std::isfinite(best) || best > field.radius) return std::nullopt;
    return best;
}

// Memoized fields keyed by (source face, barycentrics quantized at 1/64).
// Fields are built from the quantized source point, so a key always maps to
// one exact field regardless of query order or threading.
class GeodesicCache {
public:
    GeodesicCache(uint64_t mesh_hash, double radius) : mesh_hash_(mesh_hash), radius_(radius) {}

    struct Key {
        uint32_t face;
        uint8_t qa, qb;
        auto operator<=>(const Key&) const = default;
    };

    static Key quantize(const SurfacePoint& p) {
        int qa = std::clamp(int(std::lround(p.bary.x * 64.0)), 0, 64);
        int qb = std::clamp(int(std::lround(p.bary.y * 64.0)), 0, 64 - qa);
        return {p.face, uint8_t(qa), uint8_t(qb)};
    }

    static SurfacePoint dequantize(const Key& k) {
        double a = k.qa / 64.0, b = k.qb / 64.0;
        return {k.face, {a, b, 1.0 - a - b}};
    }

    std::shared_ptr<const GeodesicField> get(const Mesh& mesh, const EdgeGraph& graph, const SurfacePoint& source) {
        Key key = quantize(source);
        {
            std::lock_guard<std::mutex> lk(mu_);
            auto it = fields_.find(key);
            if (it != fields_.end()) return it->second;
        }
        auto field = std::make_shared<GeodesicField>(geodesic_field(mesh, graph, dequantize(key), radius_));
        std::lock_guard<std::mutex> lk(mu_);
        return fields_.try_emplace(key, std::move(field)).first->second;
    }

    uint64_t mesh_hash() const { return mesh_hash_; }
    double radius() const { return radius_; }
    size_t size() const {
        std::lock_guard<std::mutex> lk(mu_);
        return fields_.size();
    }

    void save(const std::string& path) const {
        std::lock_guard<std::mutex> lk(mu_);
        BinWriter w(path);
        w.magic("STXD");
        w.write<uint32_t>(1);
        w.write<uint64_t>(mesh_hash_);
        w.write<double>(radius_);
        w.write<uint64_t>(fields_.size());
        for (const auto& [key, field] : fields_) {
            w.write<uint32_t>(key.face);
            w.write<uint8_t>(key.qa);
            w.write<uint8_t>(key.qb);
            w.write<uint32_t>(uint32_t(field->vertex_dist.size()));
            for (const auto& [v, d] : field->vertex_dist) {
                w.write<uint32_t>(v);
                w.write<double>(d);
            }
        }
        w.close();
    }

    // Loads a dump if it matches this cache's mesh hash and radius.
    void load(const std::string& path, const Mesh& mesh) {
        BinReader r(path);
        r.expect_magic("STXD");
        uint32_t version = r.read<uint32_t>();
        if (version != 1) fail_data(strprintf("%s: unsupported STXD version %u", path.c_str(), version));
        uint64_t h = r.read<uint64_t>();
        double radius = r.read<double>();
        if (h != mesh_hash_ || radius != radius_)
            fail_data(path + ": cache does not match mesh/radius");
        uint64_t count = r.read<uint64_t>();
        std::lock_guard<std::mutex> lk(mu_);
        for (uint64_t i = 0; i < count; ++i) {
            Key key{};
            key.face = r.read<uint32_t>();
            key.qa = r.read<uint8_t>();
            key.qb = r.read<uint8_t>();
            auto field = std::make_shared<GeodesicField>();
            field->source = dequantize(key);
            field->source_pos = surface_position(mesh, field->source);
            field->radius = radius;
            uint32_t n = r.read<uint32_t>();
            field->vertex_dist.reserve(n);
            for (uint32_t k = 0; k < n; ++k) {
                uint32_t v = r.read<uint32_t>();
                double d = r.read<double>();
                field->vertex_dist.push_back({v, d});
            }
            fields_.try_emplace(key, std::move(field));
        }
    }

private:
    uint64_t mesh_hash_;
    double radius_;
    mutable std::mutex mu_;
    std::map<Key, std::shared_ptr<const GeodesicField>> fields_;
};

}  // namespace stx

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stx/autodiff.hpp"
#include "stx/binio.hpp"
#include "stx/gather.hpp"
#include "stx/rng.hpp"

namespace stx {

// Geometric features of one record relative to the texel: relative position,
// relative normal, normal-dot-view, surface distance. The texel itself uses
// zero offsets, ndotv = 1 (front-facing sentinel) and zero distance.
struct GeomFeatures {
    Vec3d rel_pos{0, 0, 0};
    Vec3d rel_normal{0, 0, 0};
    double ndotv = 1.0;
    double geodesic = 0.0;

    static GeomFeatures texel_self() { return {}; }

    static GeomFeatures of_record(const NeighborRecord& rec, const TexelEntry& texel) {
        GeomFeatures g;
        g.rel_pos = rec.position - texel.position;
        g.rel_normal = rec.normal - texel.normal;
        g.ndotv = rec.ndotv;
        g.geodesic = rec.geodesic;
        return g;
    }

    std::array<double, 8> to_array() const {
        return {rel_pos.x, rel_pos.y, rel_pos.z, rel_normal.x, rel_normal.y, rel_normal.z, ndotv, geodesic};
    }
};

struct NetArch {
    int pos_in = 8;
    int app_in = 3;
    int feat = 64;  // D: width of all encodings and attention features
    int out = 3;
    int blocks = 3;
    bool share_blocks = false;

    bool operator==(const NetArch&) const = default;
};

struct Tensor {
    std::string name;
    int rows = 0, cols = 0;  // cols == 1 for vectors
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::string n, int r, int c) : name(std::move(n)), rows(r), cols(c), data(size_t(r) * c, 0.0) {}
};

// All trainable parameters. Tensor order is fixed by the architecture so a
// shape-congruent gradient struct is just another NetWeights.
struct NetWeights {
    NetArch arch;
    std::vector<Tensor> tensors;

    Tensor& t(std::string_view name) {
        for (auto& tn : tensors)
            if (tn.name == name) return tn;
        fail_data("unknown tensor: " + std::string(name));
    }
    const Tensor& t(std::string_view name) const { return const_cast<NetWeights*>(this)->t(name); }

    void zero() {
        for (auto& tn : tensors) std::fill(tn.data.begin(), tn.data.end(), 0.0);
    }
};

using Gradients = NetWeights;

inline NetWeights make_weights(const NetArch& arch = {}) {
    NetWeights w;
    w.arch = arch;
    int D = arch.feat;
    w.tensors.emplace_back("pos.w1", D, arch.pos_in);
    w.tensors.emplace_back("pos.b1", D, 1);
    w.tensors.emplace_back("pos.w2", D, D);
    w.tensors.emplace_back("pos.b2", D, 1);
    w.tensors.emplace_back("app.w1", D, arch.app_in);
    w.tensors.emplace_back("app.b1", D, 1);
    w.tensors.emplace_back("app.w2", D, D);
    w.tensors.emplace_back("app.b2", D, 1);
    int stored_blocks = arch.share_blocks ? 1 : arch.blocks;
    for (int b = 0; b < stored_blocks; ++b) {
        w.tensors.emplace_back(strprintf("blk%d.q", b), D, D);
        w.tensors.emplace_back(strprintf("blk%d.k", b), D, D);
        w.tensors.emplace_back(strprintf("blk%d.v", b), D, D);
    }
    w.tensors.emplace_back("dec.w1", D, D);
    w.tensors.emplace_back("dec.b1", D, 1);
    w.tensors.emplace_back("dec.w2", arch.out, D);
    w.tensors.emplace_back("dec.b2", arch.out, 1);
    return w;
}

// He-uniform for layers followed by the softplus ramp, Xavier-uniform for the
// attention maps; biases zero. The decoder output layer is scaled down so
// initial predictions sit near the sigmoid midpoint, which keeps early Adam
// steps out of the saturated regime.
inline NetWeights init_weights(uint64_t seed, const NetArch& arch = {}) {
    NetWeights w = make_weights(arch);
    Rng rng(derive_seed(seed, "net-init"));
    for (auto& tn : w.tensors) {
        if (tn.cols == 1) continue;  // bias
        bool attention = tn.name.find("blk") == 0;
        double bound = attention ? std::sqrt(6.0 / (tn.rows + tn.cols)) : std::sqrt(6.0 / tn.cols);
        if (tn.name == "dec.w2") bound *= 0.1;
        for (auto& v : tn.data) v = rng.uniform(-bound, bound);
    }
    return w;
}

namespace detail {

// Tensor indices resolved once per forward/backward call.
struct NetRefs {
    const Tensor *pw1, *pb1, *pw2, *pb2;
    const Tensor *aw1, *ab1, *aw2, *ab2;
    std::vector<const Tensor*> q, k, v;
    const Tensor *dw1, *db1, *dw2, *db2;

    NetRefs(const NetWeights& w) {
        pw1 = &w.t("pos.w1");
        pb1 = &w.t("pos.b1");
        pw2 = &w.t("pos.w2");
        pb2 = &w.t("pos.b2");
        aw1 = &w.t("app.w1");
        ab1 = &w.t("app.b1");
        aw2 = &w.t("app.w2");
        ab2 = &w.t("app.b2");
        for (int b = 0; b < w.arch.blocks; ++b) {
            int sb = w.arch.share_blocks ? 0 : b;
            q.push_back(&w.t(strprintf("blk%d.q", sb)));
            k.push_back(&w.t(strprintf("blk%d.k", sb)));
            v.push_back(&w.t(strprintf("blk%d.v", sb)));
        }
        dw1 = &w.t("dec.w1");
        db1 = &w.t("dec.b1");
        dw2 = &w.t("dec.w2");
        db2 = &w.t("dec.b2");
    }
};

struct GradRefs {
    std::vector<double*> by_tensor;  // parallel to NetWeights::tensors
    GradRefs(Gradients* g, const NetWeights& w) {
        if (!g) {
            by_tensor.assign(w.tensors.size(), nullptr);
            return;
        }
        for (auto& tn : g->tensors) by_tensor.push_back(tn.data.data());
    }
    double* of(const NetWeights& w, const Tensor* t) {
        for (size_t i = 0; i < w.tensors.size(); ++i)
            if (&w.tensors[i] == t) return by_tensor[i];
        return nullptr;
    }
};

using Var = ad::Tape::Var;

inline Var mlp2(ad::Tape& tape, GradRefs& gr, const NetWeights& w, const Tensor* w1, const Tensor* b1,
                const Tensor* w2, const Tensor* b2, Var x) {
    Var h = tape.linear(w1->data.data(), gr.of(w, w1), b1->data.data(), gr.of(w, b1), w1->rows, w1->cols, x);
    h = tape.softplus(h);
    return tape.linear(w2->data.data(), gr.of(w, w2), b2->data.data(), gr.of(w, b2), w2->rows, w2->cols, h);
}

// Builds the whole per-texel graph; returns the predicted-color node.
inline Var build_forward(ad::Tape& tape, const NetWeights& w, GradRefs& gr, const NetRefs& refs,
                         const std::vector<GeomFeatures>& geom, const std::vector<Vec3d>& colors,
                         const Vec3d& texel_color) {
    const int D = w.arch.feat;
    size_t n = geom.size();

    auto geom_input = [&](const GeomFeatures& g) {
        auto arr = g.to_array();
        return tape.input(arr.data(), int(arr.size()));
    };
    auto color_input = [&](const Vec3d& c) {
        double arr[3] = {c.x, c.y, c.z};
        return tape.input(arr, 3);
    };

    Var h_u = mlp2(tape, gr, w, refs.pw1, refs.pb1, refs.pw2, refs.pb2, geom_input(GeomFeatures::texel_self()));
    Var f_u = mlp2(tape, gr, w, refs.aw1, refs.ab1, refs.aw2, refs.ab2, color_input(texel_color));

    std::vector<Var> f_p(n), sum_p(n);
    for (size_t i = 0; i < n; ++i) {
        Var h_p = mlp2(tape, gr, w, refs.pw1, refs.pb1, refs.pw2, refs.pb2, geom_input(geom[i]));
        f_p[i] = mlp2(tape, gr, w, refs.aw1, refs.ab1, refs.aw2, refs.ab2, color_input(colors[i]));
        sum_p[i] = tape.add(f_p[i], h_p);
    }

    double inv_sqrt_d = 1.0 / std::sqrt(double(D));
    for (int b = 0; b < w.arch.blocks; ++b) {
        Var q = tape.linear(refs.q[b]->data.data(), gr.of(w, refs.q[b]), nullptr, nullptr, D, D,
                            tape.add(f_u, h_u));
        std::vector<Var> logits(n), values(n);
        for (size_t i = 0; i < n; ++i) {
            Var k = tape.linear(refs.k[b]->data.data(), gr.of(w, refs.k[b]), nullptr, nullptr, D, D, sum_p[i]);
            logits[i] = tape.scale(tape.dot(q, k), inv_sqrt_d);
            values[i] = tape.linear(refs.v[b]->data.data(), gr.of(w, refs.v[b]), nullptr, nullptr, D, D, f_p[i]);
        }
        Var attn = tape.softmax(logits);
        f_u = tape.add(tape.weighted_sum(attn, values), f_u);
    }

    Var d1 = tape.softplus(tape.linear(refs.dw1->data.data(), gr.of(w, refs.dw1), refs.db1->data.data(),
                                       gr.of(w, refs.db1), D, D, f_u));
    Var out = tape.linear(refs.dw2->data.data(), gr.of(w, refs.dw2), refs.db2->data.data(), gr.of(w, refs.db2),
                          w.arch.out, D, d1);
    return tape.sigmoid(out);
}

inline ad::Tape& net_tape() {
    thread_local ad::Tape tape;
    return tape;
}

}  // namespace detail

// --- Spec operations --------------------------------------------------------

inline std::vector<double> encode_position(const NetWeights& w, const GeomFeatures& g) {
    auto& tape = detail::net_tape();
    tape.reset();
    detail::GradRefs gr(nullptr, w);
    detail::NetRefs refs(w);
    auto arr = g.to_array();
    auto x = tape.input(arr.data(), int(arr.size()));
    auto h = detail::mlp2(tape, gr, w, refs.pw1, refs.pb1, refs.pw2, refs.pb2, x);
    return {tape.value_ptr(h), tape.value_ptr(h) + tape.size(h)};
}

inline std::vector<double> encode_appearance(const NetWeights& w, Vec3d rgb) {
    auto& tape = detail::net_tape();
    tape.reset();
    detail::GradRefs gr(nullptr, w);
    detail::NetRefs refs(w);
    rgb = {std::clamp(rgb.x, 0.0, 1.0), std::clamp(rgb.y, 0.0, 1.0), std::clamp(rgb.z, 0.0, 1.0)};
    double arr[3] = {rgb.x, rgb.y, rgb.z};
    auto x = tape.input(arr, 3);
    auto f = detail::mlp2(tape, gr, w, refs.aw1, refs.ab1, refs.aw2, refs.ab2, x);
    return {tape.value_ptr(f), tape.value_ptr(f) + tape.size(f)};
}

// Single cross-attention block on already-encoded features. records are
// (f_p, h_p) pairs; must be non-empty.
inline std::vector<double> attention_block(const NetWeights& w, int block, const std::vector<double>& f_u,
                                           const std::vector<double>& h_u,
                                           const std::vector<std::pair<std::vector<double>, std::vector<double>>>& records) {
    if (records.empty()) fail_data("attention_block: empty record set");
    if (block < 0 || block >= w.arch.blocks) fail_usage("attention_block: block index out of range");
    auto& tape = detail::net_tape();
    tape.reset();
    detail::NetRefs refs(w);
    const int D = w.arch.feat;

    auto fu = tape.input(f_u.data(), D);
    auto hu = tape.input(h_u.data(), D);
    auto q = tape.linear(refs.q[block]->data.data(), nullptr, nullptr, nullptr, D, D, tape.add(fu, hu));
    std::vector<detail::Var> logits, values;
    double inv_sqrt_d = 1.0 / std::sqrt(double(D));
    for (const auto& [fp, hp] : records) {
        auto fpv = tape.input(fp.data(), D);
        auto hpv = tape.input(hp.data(), D);
        auto k = tape.linear(refs.k[block]->data.data(), nullptr, nullptr, nullptr, D, D, tape.add(fpv, hpv));
        logits.push_back(tape.scale(tape.dot(q, k), inv_sqrt_d));
        values.push_back(tape.linear(refs.v[block]->data.data(), nullptr, nullptr, nullptr, D, D, fpv));
    }
    auto attn = tape.softmax(logits);
    auto out = tape.add(tape.weighted_sum(attn, values), fu);
    return {tape.value_ptr(out), tape.value_ptr(out) + D};
}

// Attention weights of one block, exposed for tests and diagnostics.
inline std::vector<double> attention_weights(const NetWeights& w, int block, const std::vector<double>& f_u,
                                             const std::vector<double>& h_u,
                                             const std::vector<std::pair<std::vector<double>, std::vector<double>>>& records) {
    if (records.empty()) fail_data("attention_weights: empty record set");
    auto& tape = detail::net_tape();
    tape.reset();
    detail::NetRefs refs(w);
    const int D = w.arch.feat;
    auto fu = tape.input(f_u.data(), D);
    auto hu = tape.input(h_u.data(), D);
    auto q = tape.linear(refs.q[block]->data.data(), nullptr, nullptr, nullptr, D, D, tape.add(fu, hu));
    std::vector<detail::Var> logits;
    double inv_sqrt_d = 1.0 / std::sqrt(double(D));
    for (const auto& [fp, hp] : records) {
        auto fpv = tape.input(fp.data(), D);
        auto hpv = tape.input(hp.data(), D);
        auto k = tape.linear(refs.k[block]->data.data(), nullptr, nullptr, nullptr, D, D, tape.add(fpv, hpv));
        logits.push_back(tape.scale(tape.dot(q, k), inv_sqrt_d));
    }
    auto attn = tape.softmax(logits);
    return {tape.value_ptr(attn), tape.value_ptr(attn) + records.size()};
}

namespace detail {

inline void split_neighbor_set(const TexelEntry& texel, const NeighborSet& ns, std::vector<GeomFeatures>& geom,
                               std::vector<Vec3d>& colors) {
    geom.clear();
    colors.clear();
    geom.reserve(ns.records.size());
    colors.reserve(ns.records.size());
    for (const auto& rec : ns.records) {
        geom.push_back(GeomFeatures::of_record(rec, texel));
        Vec3d c = to_d(rec.color);
        colors.push_back({std::clamp(c.x, 0.0, 1.0), std::clamp(c.y, 0.0, 1.0), std::clamp(c.z, 0.0, 1.0)});
    }
}

}  // namespace detail

// Full forward pass for one texel. current_color seeds the texel's appearance
// encoding; empty texels encode black. Returns nullopt for an empty
// neighborhood (texel is left to inpainting).
inline std::optional<Vec3d> forward(const NetWeights& w, const TexelEntry& texel, const NeighborSet& ns,
                                    std::optional<Vec3d> current_color = std::nullopt) {
    if (ns.records.empty()) return std::nullopt;
    auto& tape = detail::net_tape();
    tape.reset();
    detail::GradRefs gr(nullptr, w);
    detail::NetRefs refs(w);
    std::vector<GeomFeatures> geom;
    std::vector<Vec3d> colors;
    detail::split_neighbor_set(texel, ns, geom, colors);
    auto out = detail::build_forward(tape, w, gr, refs, geom, colors, current_color.value_or(Vec3d{0, 0, 0}));
    const double* v = tape.value_ptr(out);
    return Vec3d{v[0], v[1], v[2]};
}

struct TrainItem {
    const TexelEntry* texel;
    const NeighborSet* neighbors;
    std::optional<Vec3d> current_color;
    Vec3d target;
};

// Loss and gradients for a single item, accumulated into `grads` with the
// given seed scale (1/batch for batch means).
inline double item_backward(const NetWeights& w, const TrainItem& item, Gradients& grads, double seed_scale) {
    if (!item.neighbors || item.neighbors->records.empty())
        fail_data("backward: batch item with empty neighborhood");
    auto& tape = detail::net_tape();
    tape.reset();
    detail::NetRefs refs(w);
    detail::GradRefs gr(&grads, w);
    std::vector<GeomFeatures> geom;
    std::vector<Vec3d> colors;
    detail::split_neighbor_set(*item.texel, *item.neighbors, geom, colors);
    auto out = detail::build_forward(tape, w, gr, refs, geom, colors, item.current_color.value_or(Vec3d{0, 0, 0}));
    double target[3] = {item.target.x, item.target.y, item.target.z};
    auto loss = tape.l1_loss(out, target, 3);
    double lv = tape.scalar(loss);
    if (!std::isfinite(lv))
        fail_numeric(strprintf("backward: non-finite loss at texel (%d,%d)", item.neighbors->texel_x,
                               item.neighbors->texel_y));
    tape.backward(loss, seed_scale);
    return lv;
}

// Batch loss and exact reverse-mode gradients. Loss is the mean over batch
// items and channels of |prediction - target|.
inline double backward(const NetWeights& w, const std::vector<TrainItem>& batch, Gradients& grads) {
    if (batch.empty()) fail_usage("backward: empty batch");
    grads.zero();
    double total = 0;
    for (const auto& item : batch) total += item_backward(w, item, grads, 1.0 / double(batch.size()));
    return total / double(batch.size());
}

// --- Weights file (STXW) -----------------------------------------------------

inline void save_weights(const NetWeights& w, const std::string& path) {
    BinWriter out(path);
    out.magic("STXW");
    out.write<uint32_t>(1);
    out.write<uint32_t>(uint32_t(w.arch.pos_in));
    out.write<uint32_t>(uint32_t(w.arch.app_in));
    out.write<uint32_t>(uint32_t(w.arch.feat));
    out.write<uint32_t>(uint32_t(w.arch.out));
    out.write<uint32_t>(uint32_t(w.arch.blocks));
    out.write<uint8_t>(w.arch.share_blocks ? 1 : 0);
    out.write<uint32_t>(uint32_t(w.tensors.size()));
    for (const auto& tn : w.tensors) {
        out.str(tn.name);
        out.write<uint32_t>(uint32_t(tn.rows));
        out.write<uint32_t>(uint32_t(tn.cols));
        out.bytes(tn.data.data(), tn.data.size() * sizeof(double));
    }
    out.close();
}

inline NetWeights load_weights(const std::string& path) {
    BinReader in(path);
    in.expect_magic("STXW");
    uint32_t version = in.read<uint32_t>();
    if (version != 1) fail_data(strprintf("%s: unsupported STXW version %u", path.c_str(), version));
    NetArch arch;
    arch.pos_in = int(in.read<uint32_t>());
    arch.app_in = int(in.read<uint32_t>());
    arch.feat = int(in.read<uint32_t>());
    arch.out = int(in.read<uint32_t>());
    arch.blocks = int(in.read<uint32_t>());
    arch.share_blocks = in.read<uint8_t>() != 0;
    NetWeights expected = make_weights(arch);
    uint32_t count = in.read<uint32_t>();
    if (count != expected.tensors.size())
        fail_data(strprintf("%s: tensor count %u does not match architecture", path.c_str(), count));
    for (auto& tn : expected.tensors) {
        std::string name = in.str();
        uint32_t rows = in.read<uint32_t>(), cols = in.read<uint32_t>();
        if (name != tn.name || int(rows) != tn.rows || int(cols) != tn.cols)
            fail_data(strprintf("%s: tensor %s has unexpected shape or order", path.c_str(), name.c_str()));
        in.bytes(tn.data.data(), tn.data.size() * sizeof(double));
        for (double v : tn.data)
            if (!std::isfinite(v)) fail_data(strprintf("%s: non-finite value in tensor %s", path.c_str(), name.c_str()));
    }
    return expected;
}

}  // namespace stx

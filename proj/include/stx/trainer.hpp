#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stx/backproject.hpp"
#include "stx/evalkit.hpp"
#include "stx/net.hpp"
#include "stx/primitives.hpp"
#include "stx/raster.hpp"
#include "stx/rng.hpp"

namespace stx {

struct TrainConfig {
    int batch_size = 4;
    int epochs = 10;
    double lr = 1e-3;
    double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    double aug_lo = 0.2, aug_hi = 0.7;  // augmentation strength range
    double aug_fraction = 0.5;          // share of items drawn from perturbed renders
    int K = 3;
    bool use_geodesics = true;
    uint64_t seed = 7;
    int texels_per_scene = 4096;
    int holdout_texels_per_scene = 1024;
    int workers = 1;
    double geodesic_radius = kDefaultGeodesicRadius;
    double visibility_epsilon = 1e-3;
    NetArch arch;

    void validate() const {
        if (batch_size < 1) fail_usage("train: batch_size must be >= 1");
        if (!(0 <= aug_lo && aug_lo <= aug_hi && aug_hi <= 1)) fail_usage("train: require 0 <= lo <= hi <= 1");
        if (K < 1 || K % 2 == 0) fail_usage("train: K must be odd and >= 1");
    }
};

enum class SceneKind { sphere, torus, cube, capsule };

inline const char* scene_kind_name(SceneKind k) {
    switch (k) {
        case SceneKind::sphere: return "sphere";
        case SceneKind::torus: return "torus";
        case SceneKind::cube: return "cube";
        case SceneKind::capsule: return "capsule";
    }
    return "?";
}

inline SceneKind scene_kind_from_name(const std::string& s) {
    if (s == "sphere") return SceneKind::sphere;
    if (s == "torus") return SceneKind::torus;
    if (s == "cube") return SceneKind::cube;
    if (s == "capsule") return SceneKind::capsule;
    fail_usage("unknown scene kind: " + s);
}

// One synthetic training scene: a textured primitive plus views rendered from
// it. Views are rendered from the gutter-padded target so chart borders never
// sample empty texels; the loss target stays the unpadded painted texture.
struct SceneSample {
    std::string name;
    Mesh mesh;
    TexelMap texel_map;
    Texture target;
    std::vector<Camera> cameras;
    std::vector<ImageRGB> images;  // clean renders
    std::shared_ptr<EdgeGraph> graph;
    std::shared_ptr<GeodesicCache> geo_cache;
    uint64_t seed = 0;
};

inline SceneSample make_synthetic_scene(SceneKind kind, Pattern pattern, int resolution, uint64_t seed,
                                        int workers = 1) {
    SceneSample s;
    s.seed = seed;
    s.name = strprintf("%s_%s_%llu", scene_kind_name(kind), pattern_name(pattern),
                       static_cast<unsigned long long>(seed));
    switch (kind) {
        case SceneKind::sphere: s.mesh = make_uv_sphere(); break;
        case SceneKind::torus: s.mesh = make_torus(); break;
        case SceneKind::cube: s.mesh = make_cube(); break;
        case SceneKind::capsule: s.mesh = make_capsule(); break;
    }
    s.mesh = compute_normals(normalize_mesh(s.mesh));
    s.texel_map = build_texel_map(s.mesh, resolution, resolution);
    s.target = paint_texture(s.texel_map, pattern, seed);
    s.cameras = make_view_ring(6, {}, 2.0, resolution * 2);
    Texture padded = inpaint_pullpush(s.target, s.mesh, s.texel_map);
    for (const auto& cam : s.cameras) s.images.push_back(render_textured(s.mesh, padded, cam, nullptr, nullptr, workers));
    s.graph = std::make_shared<EdgeGraph>(build_edge_graph(s.mesh));
    s.geo_cache = std::make_shared<GeodesicCache>(mesh_hash(s.mesh), kDefaultGeodesicRadius);
    return s;
}

// --- View augmentation -------------------------------------------------------
// Stand-in for re-generating views with partial noise: appearance-only
// perturbation (per-view brightness/hue shift plus a smooth low-frequency
// color field). Geometry and G-buffers are untouched.

inline ImageRGB augment_image(const ImageRGB& img, double strength, uint64_t view_seed) {
    Rng rng(view_seed);
    double bright = 1.0 + 0.5 * strength * rng.uniform(-1.0, 1.0);
    Vec3f shift{float(0.35 * strength * rng.uniform(-1.0, 1.0)), float(0.35 * strength * rng.uniform(-1.0, 1.0)),
                float(0.35 * strength * rng.uniform(-1.0, 1.0))};
    struct Field {
        double fx, fy, phase, amp;
    };
    Field fields[3];
    for (auto& f : fields)
        f = {0.5 + rng.uniform(), 0.5 + rng.uniform(), rng.uniform(0.0, 6.2831853), 0.3 * strength * rng.uniform(-1.0, 1.0)};
    ImageRGB out(img.width, img.height);
    const double two_pi = 6.2831853071795864769;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            Vec3f c = img.at(x, y);
            double fx = double(x) / img.width, fy = double(y) / img.height;
            Vec3f field{float(fields[0].amp * std::sin(two_pi * (fields[0].fx * fx + fields[0].fy * fy) + fields[0].phase)),
                        float(fields[1].amp * std::sin(two_pi * (fields[1].fx * fx + fields[1].fy * fy) + fields[1].phase)),
                        float(fields[2].amp * std::sin(two_pi * (fields[2].fx * fx + fields[2].fy * fy) + fields[2].phase))};
            Vec3f v{float(c.x * bright + shift.x + field.x), float(c.y * bright + shift.y + field.y),
                    float(c.z * bright + shift.z + field.z)};
            out.set(x, y, {std::clamp(v.x, 0.0f, 1.0f), std::clamp(v.y, 0.0f, 1.0f), std::clamp(v.z, 0.0f, 1.0f)});
        }
    return out;
}

inline std::vector<ImageRGB> augment_images(const std::vector<ImageRGB>& images, double strength, uint64_t seed) {
    if (strength < 0 || strength > 1) fail_usage("augment: strength must be in [0,1]");
    if (strength == 0) return images;
    std::vector<ImageRGB> out;
    out.reserve(images.size());
    for (size_t v = 0; v < images.size(); ++v)
        out.push_back(augment_image(images[v], strength, derive_seed(seed, "augment-view", v)));
    return out;
}

inline SceneSample augment_views(const SceneSample& sample, double strength, uint64_t seed) {
    SceneSample out = sample;
    out.images = augment_images(sample.images, strength, seed);
    return out;
}

// --- Training ----------------------------------------------------------------

namespace detail {

struct PreparedScene {
    const SceneSample* scene;
    std::vector<NeighborSet> neighborhoods;  // covered texels only
    std::vector<TexelEntry> entries;
    std::vector<Vec3d> targets;
};

inline PreparedScene prepare_scene(const SceneSample& scene, const TrainConfig& cfg) {
    PreparedScene p;
    p.scene = &scene;
    GatherOptions gopts;
    gopts.K = cfg.K;
    gopts.visibility_epsilon = cfg.visibility_epsilon;
    gopts.geodesic_radius = cfg.geodesic_radius;
    gopts.use_geodesics = cfg.use_geodesics;
    gopts.workers = cfg.workers;
    std::vector<ViewBundle> views;
    for (size_t v = 0; v < scene.cameras.size(); ++v)
        views.push_back(make_view_bundle(scene.mesh, scene.cameras[v], scene.images[v], cfg.workers));
    auto sets = gather_neighborhoods(scene.mesh, scene.texel_map, views, scene.graph.get(),
                                     scene.geo_cache.get(), gopts);
    for (auto& ns : sets) {
        if (ns.records.empty()) continue;
        const TexelEntry& e = scene.texel_map.at(ns.texel_x, ns.texel_y);
        p.entries.push_back(e);
        p.targets.push_back(to_d(scene.target.at(ns.texel_x, ns.texel_y)));
        p.neighborhoods.push_back(std::move(ns));
    }
    return p;
}

struct AdamState {
    std::vector<std::vector<double>> m, v;
    int t = 0;

    explicit AdamState(const NetWeights& w) {
        for (const auto& tn : w.tensors) {
            m.emplace_back(tn.data.size(), 0.0);
            v.emplace_back(tn.data.size(), 0.0);
        }
    }

    void step(NetWeights& w, const Gradients& g, const TrainConfig& cfg, double lr) {
        ++t;
        double bc1 = 1.0 - std::pow(cfg.beta1, t);
        double bc2 = 1.0 - std::pow(cfg.beta2, t);
        for (size_t i = 0; i < w.tensors.size(); ++i) {
            auto& p = w.tensors[i].data;
            const auto& gd = g.tensors[i].data;
            auto& mi = m[i];
            auto& vi = v[i];
            for (size_t j = 0; j < p.size(); ++j) {
                mi[j] = cfg.beta1 * mi[j] + (1.0 - cfg.beta1) * gd[j];
                vi[j] = cfg.beta2 * vi[j] + (1.0 - cfg.beta2) * gd[j] * gd[j];
                p[j] -= lr * (mi[j] / bc1) / (std::sqrt(vi[j] / bc2) + cfg.adam_eps);
            }
        }
    }
};

// Warmup then cosine decay to 1% of the peak rate. With L1's non-vanishing
// gradients Adam oscillates at an amplitude proportional to the step size, so
// the tail decay is what lets runs settle.
inline double scheduled_lr(double peak, int step, int total_steps) {
    int warm = std::max(1, total_steps / 20);
    if (step <= warm) return peak * double(step) / warm;
    double t = double(step - warm) / std::max(1, total_steps - warm);
    return peak * (0.01 + 0.99 * 0.5 * (1.0 + std::cos(3.14159265358979323846 * t)));
}

// Per-item gradient buffers summed in item order: deterministic for any
// worker count.
inline double batch_step(const NetWeights& w, const std::vector<TrainItem>& batch,
                         std::vector<Gradients>& item_grads, Gradients& grads, int workers) {
    size_t B = batch.size();
    while (item_grads.size() < B) item_grads.push_back(make_weights(w.arch));
    std::vector<double> losses(B, 0.0);
    parallel_for(B, workers, [&](size_t i) {
        item_grads[i].zero();
        losses[i] = item_backward(w, batch[i], item_grads[i], 1.0 / double(B));
    });
    grads.zero();
    double total = 0;
    for (size_t i = 0; i < B; ++i) {
        total += losses[i];
        for (size_t ti = 0; ti < grads.tensors.size(); ++ti) {
            auto& dst = grads.tensors[ti].data;
            const auto& src = item_grads[i].tensors[ti].data;
            for (size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
        }
    }
    return total / double(B);
}

}  // namespace detail

struct LossCurvePoint {
    int epoch;
    double train_loss;
    double holdout_l1;  // -1 when no holdout set was given
};

struct TrainResult {
    NetWeights final_weights;
    NetWeights best_weights;
    std::vector<LossCurvePoint> curve;
    bool diverged = false;
    int best_epoch = -1;
};

inline void write_loss_curve_csv(const std::vector<LossCurvePoint>& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail_data("cannot write loss curve: " + path);
    out << "epoch,train_loss,holdout_l1\n";
    char buf[128];
    for (const auto& p : curve) {
        std::snprintf(buf, sizeof buf, "%d,%.8f,%.8f\n", p.epoch, p.train_loss, p.holdout_l1);
        out << buf;
    }
}

// Minibatch Adam over per-texel items sampled uniformly from covered texels.
// Half of the items (aug_fraction) read colors from perturbed renders whose
// strength is drawn per scene and epoch from [aug_lo, aug_hi]. Deterministic
// given cfg.seed for any worker count.
inline TrainResult train(const std::vector<SceneSample>& dataset, const TrainConfig& cfg,
                         const std::vector<SceneSample>& holdout = {}) {
    cfg.validate();
    if (dataset.empty()) fail_usage("train: empty dataset");

    std::vector<detail::PreparedScene> scenes;
    for (const auto& s : dataset) scenes.push_back(detail::prepare_scene(s, cfg));
    std::vector<detail::PreparedScene> hold;
    for (const auto& s : holdout) hold.push_back(detail::prepare_scene(s, cfg));

    // Fixed holdout probes: perturbed colors and texel choices drawn once.
    struct HoldoutProbe {
        const detail::PreparedScene* scene;
        std::vector<NeighborSet> sets;  // recolored from perturbed views
        std::vector<size_t> indices;
    };
    std::vector<HoldoutProbe> probes;
    for (size_t hi = 0; hi < hold.size(); ++hi) {
        HoldoutProbe probe;
        probe.scene = &hold[hi];
        Rng hrng(derive_seed(cfg.seed, "holdout", hi));
        double strength = hrng.uniform(cfg.aug_lo, cfg.aug_hi);
        auto aug = augment_images(hold[hi].scene->images, strength, derive_seed(cfg.seed, "holdout-aug", hi));
        size_t n = hold[hi].neighborhoods.size();
        int count = std::min<int>(cfg.holdout_texels_per_scene, int(n));
        for (int k = 0; k < count; ++k) {
            size_t idx = size_t(hrng.uniform_index(n));
            NeighborSet ns = hold[hi].neighborhoods[idx];
            for (auto& rec : ns.records) rec.color = aug[rec.view_id].at(rec.px, rec.py);
            probe.sets.push_back(std::move(ns));
            probe.indices.push_back(idx);
        }
        probes.push_back(std::move(probe));
    }

    NetWeights weights = init_weights(cfg.seed, cfg.arch);
    Gradients grads = make_weights(cfg.arch);
    std::vector<Gradients> item_grads;
    detail::AdamState adam(weights);
    Rng rng(derive_seed(cfg.seed, "train"));

    size_t plan_items_per_epoch = 0;
    for (const auto& s : scenes)
        if (!s.neighborhoods.empty()) plan_items_per_epoch += size_t(cfg.texels_per_scene);
    int total_steps = cfg.epochs * int(plan_items_per_epoch / size_t(cfg.batch_size));
    int global_step = 0;

    TrainResult result;
    result.final_weights = weights;
    result.best_weights = weights;
    double best_l1 = std::numeric_limits<double>::infinity();
    NetWeights last_good = weights;

    struct ItemDesc {
        uint32_t scene, texel;
        uint8_t augmented;
    };

    auto holdout_l1 = [&](const NetWeights& w) -> double {
        if (probes.empty()) return -1.0;
        double acc = 0;
        size_t n = 0;
        for (const auto& probe : probes) {
            std::vector<double> errs(probe.sets.size(), 0.0);
            parallel_for(probe.sets.size(), cfg.workers, [&](size_t k) {
                size_t idx = probe.indices[k];
                auto out = forward(w, probe.scene->entries[idx], probe.sets[k]);
                Vec3d t = probe.scene->targets[idx];
                Vec3d d = *out - t;
                errs[k] = (std::abs(d.x) + std::abs(d.y) + std::abs(d.z)) / 3.0;
            });
            for (double e : errs) acc += e;
            n += probe.sets.size();
        }
        return n ? acc / double(n) : -1.0;
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Per-scene perturbation strengths, then this epoch's item plan; the
        // rng call order here is part of the determinism contract.
        std::vector<double> strengths;
        for (size_t s = 0; s < scenes.size(); ++s) strengths.push_back(rng.uniform(cfg.aug_lo, cfg.aug_hi));
        std::vector<std::vector<ImageRGB>> aug;
        for (size_t s = 0; s < scenes.size(); ++s)
            aug.push_back(augment_images(scenes[s].scene->images, strengths[s],
                                         derive_seed(cfg.seed, "aug", uint64_t(epoch) * 1024 + s)));

        std::vector<ItemDesc> plan;
        for (uint32_t s = 0; s < scenes.size(); ++s) {
            size_t n = scenes[s].neighborhoods.size();
            if (n == 0) continue;
            for (int k = 0; k < cfg.texels_per_scene; ++k) {
                uint32_t idx = uint32_t(rng.uniform_index(n));
                uint8_t augmented = rng.uniform() < cfg.aug_fraction ? 1 : 0;
                plan.push_back({s, idx, augmented});
            }
        }
        rng.shuffle(plan);

        double epoch_loss = 0;
        size_t steps = 0;
        bool nan_abort = false;
        std::vector<NeighborSet> batch_sets(size_t(cfg.batch_size));
        for (size_t start = 0; start + cfg.batch_size <= plan.size(); start += cfg.batch_size) {
            std::vector<TrainItem> batch;
            for (int b = 0; b < cfg.batch_size; ++b) {
                const ItemDesc& d = plan[start + b];
                const detail::PreparedScene& ps = scenes[d.scene];
                batch_sets[size_t(b)] = ps.neighborhoods[d.texel];
                if (d.augmented)
                    for (auto& rec : batch_sets[size_t(b)].records)
                        rec.color = aug[d.scene][rec.view_id].at(rec.px, rec.py);
                batch.push_back({&ps.entries[d.texel], &batch_sets[size_t(b)], std::nullopt, ps.targets[d.texel]});
            }
            double loss;
            try {
                loss = detail::batch_step(weights, batch, item_grads, grads, cfg.workers);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::numeric) throw;
                nan_abort = true;
                break;
            }
            ++global_step;
            adam.step(weights, grads, cfg, detail::scheduled_lr(cfg.lr, global_step, total_steps));
            epoch_loss += loss;
            ++steps;
        }
        if (nan_abort) {
            result.diverged = true;
            result.final_weights = last_good;
            return result;
        }

        double hl1 = holdout_l1(weights);
        result.curve.push_back({epoch, steps ? epoch_loss / double(steps) : 0.0, hl1});
        last_good = weights;
        double score = hl1 >= 0 ? hl1 : (steps ? epoch_loss / double(steps) : 0.0);
        if (score < best_l1) {
            best_l1 = score;
            result.best_weights = weights;
            result.best_epoch = epoch;
        }
    }
    result.final_weights = weights;
    return result;
}

// --- Holdout evaluation ------------------------------------------------------

struct HoldoutEvalOptions {
    BackprojectOptions bp;
    double aug_lo = 0.2, aug_hi = 0.7;
    uint64_t seed = 7;
    bool inpaint = true;
};

// Per-scene metric rows for the neural strategy and the three heuristics on
// perturbed views. Coverage is measured before inpainting, the color metrics
// after, so every strategy is compared on complete textures.
inline std::vector<EvalRow> holdout_eval(const NetWeights& weights, const std::vector<SceneSample>& scenes,
                                         const HoldoutEvalOptions& opts) {
    if (scenes.empty()) fail_usage("holdout_eval: empty dataset");
    std::vector<EvalRow> rows;
    for (size_t si = 0; si < scenes.size(); ++si) {
        const SceneSample& scene = scenes[si];
        Rng rng(derive_seed(opts.seed, "eval-strength", si));
        double strength = rng.uniform(opts.aug_lo, opts.aug_hi);
        auto images = augment_images(scene.images, strength, derive_seed(opts.seed, "eval-aug", si));
        std::vector<ViewBundle> views;
        for (size_t v = 0; v < scene.cameras.size(); ++v)
            views.push_back(make_view_bundle(scene.mesh, scene.cameras[v], images[v], opts.bp.workers));
        SeamGraph seams = build_seam_graph(scene.mesh, scene.texel_map);

        for (Strategy strat : {Strategy::neural, Strategy::frontfacing, Strategy::average, Strategy::weighted}) {
            Texture tex = backproject_pass(strat, scene.mesh, scene.texel_map, views,
                                           strat == Strategy::neural ? &weights : nullptr, opts.bp, nullptr);
            EvalRow row;
            row.scene = scene.name;
            row.strategy = strategy_name(strat);
            row.K = opts.bp.K;
            row.geodesics = opts.bp.use_geodesics;
            row.thr = opts.bp.thr;
            row.coverage_frac = coverage(tex, scene.texel_map);
            Texture complete = opts.inpaint ? inpaint_pullpush(tex, scene.mesh, scene.texel_map) : tex;
            row.l1 = l1_texture_error(complete, scene.target, MaskMode::all);
            row.psnr_db = psnr(complete, scene.target, MaskMode::all);
            row.seam = seam_energy(complete, seams);
            rows.push_back(row);
        }
    }
    return rows;
}

// The desk-scale corpus: deterministic mix of primitives and patterns.
inline std::vector<SceneSample> standard_corpus(bool holdout, int resolution, uint64_t seed, int workers = 1) {
    struct Spec {
        SceneKind kind;
        Pattern pattern;
        uint64_t salt;
    };
    std::vector<Spec> specs;
    if (!holdout) {
        specs = {{SceneKind::sphere, Pattern::checker, 11},  {SceneKind::torus, Pattern::stripes, 12},
                 {SceneKind::cube, Pattern::gradient, 13},   {SceneKind::capsule, Pattern::noise, 14},
                 {SceneKind::sphere, Pattern::stripes, 15},  {SceneKind::torus, Pattern::gradient, 16},
                 {SceneKind::cube, Pattern::noise, 17},      {SceneKind::capsule, Pattern::checker, 18}};
    } else {
        specs = {{SceneKind::sphere, Pattern::gradient, 31},
                 {SceneKind::torus, Pattern::checker, 32},
                 {SceneKind::cube, Pattern::stripes, 33},
                 {SceneKind::capsule, Pattern::gradient, 34}};
    }
    std::vector<SceneSample> out;
    for (const auto& sp : specs)
        out.push_back(make_synthetic_scene(sp.kind, sp.pattern, resolution, derive_seed(seed, "scene", sp.salt),
                                           workers));
    return out;
}

}  // namespace stx

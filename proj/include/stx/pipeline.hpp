#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "stx/backproject.hpp"
#include "stx/evalkit.hpp"
#include "stx/manifest.hpp"
#include "stx/trainer.hpp"

namespace stx {

namespace fs = std::filesystem;

// Shared knobs for the pipeline subcommands.
struct PipelineConfig {
    std::string mesh_path;
    int texture_width = 1024;
    int texture_height = 1024;
    int view_count = 6;
    int view_resolution = 512;
    std::string camera_file;  // overrides the preset ring when set
    Strategy strategy = Strategy::frontfacing;
    int K = 3;
    double thr = 0.1;
    double power = 1.0;
    double geodesic_radius = kDefaultGeodesicRadius;
    bool use_geodesics = true;
    std::string weights_path;
    std::string out_dir;
    uint64_t seed = 7;
    int workers = 1;
    bool inpaint = true;
    bool timings = false;

    // Pipeline image source: external images dir, or a reference texture to
    // render the views from (self-contained round-trip mode).
    std::string images_dir;
    std::string reference_texture;

    BackprojectOptions backproject_options() const {
        BackprojectOptions o;
        o.thr = thr;
        o.power = power;
        o.K = K;
        o.geodesic_radius = geodesic_radius;
        o.use_geodesics = use_geodesics;
        o.workers = workers;
        return o;
    }
};

inline Mesh load_prepared_mesh(const std::string& path) {
    Mesh mesh = load_mesh(path);
    mesh = normalize_mesh(mesh);
    return compute_normals(std::move(mesh));
}

inline std::vector<Camera> pipeline_cameras(const PipelineConfig& cfg) {
    if (!cfg.camera_file.empty()) return load_camera_file(cfg.camera_file);
    return make_view_ring(cfg.view_count, {}, 2.0, cfg.view_resolution);
}

inline std::string geo_cache_dir(const std::string& fallback) {
    const char* env = std::getenv("STX_CACHE_DIR");
    return env && *env ? std::string(env) : fallback;
}

// prepare: normalized mesh, texel map, atlas report, optional geodesic cache.
inline void cmd_prepare(const PipelineConfig& cfg, bool geodesic_cache = false) {
    fs::create_directories(cfg.out_dir);
    Mesh mesh = load_prepared_mesh(cfg.mesh_path);
    AtlasReport report;
    TexelMap map = build_texel_map(mesh, cfg.texture_width, cfg.texture_height, &report);
    save_mesh(mesh, cfg.out_dir + "/mesh_prepared.obj");
    save_texel_map(map, cfg.out_dir + "/texelmap.stxm");

    json rj;
    rj["chart_count"] = report.chart_count;
    rj["overlap_texel_count"] = report.overlap_texel_count;
    rj["multi_face_uv_reuse"] = report.multi_face_uv_reuse;
    rj["chart_coverage"] = report.chart_coverage;
    rj["non_manifold"] = mesh.non_manifold;
    rj["warnings"] = mesh.warnings;
    rj["valid_texels"] = map.valid_count();
    std::ofstream out(cfg.out_dir + "/atlas_report.json");
    out << rj.dump(2) << "\n";

    if (geodesic_cache) {
        EdgeGraph graph = build_edge_graph(mesh);
        GeodesicCache cache(mesh_hash(mesh), cfg.geodesic_radius);
        std::vector<GeodesicCache::Key> keys;
        for (const auto& e : map.entries)
            if (e.valid) keys.push_back(GeodesicCache::quantize({e.face, e.bary}));
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        parallel_for(keys.size(), cfg.workers, [&](size_t i) {
            if (!graph.face_degenerate[keys[i].face])
                cache.get(mesh, graph, GeodesicCache::dequantize(keys[i]));
        });
        fs::create_directories(geo_cache_dir(cfg.out_dir));
        cache.save(geo_cache_dir(cfg.out_dir) + strprintf("/geodesics_%016llx.stxd",
                                                          static_cast<unsigned long long>(mesh_hash(mesh))));
    }
}

// render-views: depth PNGs + G-buffers + the manifest the external image
// generator fills in.
inline ViewsManifest cmd_render_views(const PipelineConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    Mesh mesh = load_prepared_mesh(cfg.mesh_path);
    std::vector<Camera> cams = pipeline_cameras(cfg);
    ViewsManifest manifest;
    manifest.mesh = cfg.mesh_path;
    for (size_t i = 0; i < cams.size(); ++i) {
        GBuffer gb = render_gbuffer(mesh, cams[i], cfg.workers);
        ViewsManifestEntry e;
        e.id = int(i);
        e.camera = cams[i];
        e.depth_png = strprintf("depth_%03zu.png", i);
        e.gbuffer = strprintf("view_%03zu.stxg", i);
        e.image = strprintf("view_%03zu.png", i);
        save_depth_png(gb, cams[i], cfg.out_dir + "/" + e.depth_png);
        save_gbuffer(gb, cfg.out_dir + "/" + e.gbuffer);
        manifest.views.push_back(e);
    }
    save_views_manifest(manifest, cfg.out_dir + "/manifest.json");
    return manifest;
}

// backproject: views manifest + images -> texture (+ mask, STXT, inpainted).
inline Texture cmd_backproject(const PipelineConfig& cfg, const std::string& manifest_path,
                               const std::string& images_dir) {
    fs::create_directories(cfg.out_dir);
    Mesh mesh = load_prepared_mesh(cfg.mesh_path);
    TexelMap map = build_texel_map(mesh, cfg.texture_width, cfg.texture_height);
    ViewsManifest manifest = load_views_manifest(manifest_path);

    std::vector<ViewBundle> views;
    for (const auto& e : manifest.views) {
        std::string img_path = images_dir.empty() ? e.image : images_dir + "/" + fs::path(e.image).filename().string();
        ImageRGB img = load_png(img_path);
        if (img.width != e.camera.width || img.height != e.camera.height)
            fail_data(strprintf("%s: image is %dx%d but the camera renders %dx%d", img_path.c_str(), img.width,
                                img.height, e.camera.width, e.camera.height));
        views.push_back(make_view_bundle(mesh, e.camera, std::move(img), cfg.workers));
    }

    NetWeights weights;
    const NetWeights* wp = nullptr;
    if (cfg.strategy == Strategy::neural) {
        if (cfg.weights_path.empty()) fail_usage("neural strategy requires --weights");
        weights = load_weights(cfg.weights_path);
        wp = &weights;
    }
    Texture tex = backproject_pass(cfg.strategy, mesh, map, views, wp, cfg.backproject_options(), nullptr);
    save_texture_png(tex, cfg.out_dir + "/texture.png");
    save_coverage_png(tex, cfg.out_dir + "/texture_mask.png");
    save_texture_stxt(tex, cfg.out_dir + "/texture.stxt");
    if (cfg.inpaint) {
        Texture full = inpaint_pullpush(tex, mesh, map);
        save_texture_png(full, cfg.out_dir + "/texture_inpainted.png");
        save_texture_stxt(full, cfg.out_dir + "/texture_inpainted.stxt");
        return full;
    }
    return tex;
}

// Self-contained pipeline: prepare -> render-views -> [image source] ->
// backproject -> inpaint -> eval. In reference-texture mode the "external"
// images are textured renders, making the whole loop verifiable offline.
inline void run_pipeline(const PipelineConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    auto t0 = std::chrono::steady_clock::now();

    PipelineConfig prep = cfg;
    prep.out_dir = cfg.out_dir + "/prepared";
    cmd_prepare(prep);

    PipelineConfig rv = cfg;
    rv.out_dir = cfg.out_dir + "/views";
    ViewsManifest manifest = cmd_render_views(rv);

    std::string images_dir = cfg.images_dir;
    if (images_dir.empty()) {
        if (cfg.reference_texture.empty())
            fail_usage("pipeline: need --images-dir (external generator output) or --reference-texture");
        Mesh mesh = load_prepared_mesh(cfg.mesh_path);
        TexelMap map = build_texel_map(mesh, cfg.texture_width, cfg.texture_height);
        Texture ref = fs::path(cfg.reference_texture).extension() == ".stxt"
                          ? load_texture_stxt(cfg.reference_texture)
                          : load_texture_png(cfg.reference_texture);
        if (ref.width != map.width || ref.height != map.height)
            fail_data("pipeline: reference texture dimensions disagree with --texture-size");
        Texture padded = inpaint_pullpush(ref, mesh, map);
        images_dir = cfg.out_dir + "/views";
        for (const auto& e : manifest.views) {
            ImageRGB img = render_textured(mesh, padded, e.camera, nullptr, nullptr, cfg.workers);
            save_png(images_dir + "/" + e.image, img);
        }
    }

    PipelineConfig bp = cfg;
    bp.out_dir = cfg.out_dir + "/backproject";
    Texture result = cmd_backproject(bp, cfg.out_dir + "/views/manifest.json", images_dir);

    // Metrics: against the reference when we have one, else coverage only.
    Mesh mesh = load_prepared_mesh(cfg.mesh_path);
    TexelMap map = build_texel_map(mesh, cfg.texture_width, cfg.texture_height);
    SeamGraph seams = build_seam_graph(mesh, map);
    Texture raw = load_texture_stxt(cfg.out_dir + "/backproject/texture.stxt");
    EvalRow row;
    row.scene = fs::path(cfg.mesh_path).stem().string();
    row.strategy = strategy_name(cfg.strategy);
    row.K = cfg.K;
    row.geodesics = cfg.use_geodesics;
    row.thr = cfg.thr;
    row.coverage_frac = coverage(raw, map);
    row.seam = seam_energy(result, seams);
    if (!cfg.reference_texture.empty()) {
        Texture ref = fs::path(cfg.reference_texture).extension() == ".stxt"
                          ? load_texture_stxt(cfg.reference_texture)
                          : load_texture_png(cfg.reference_texture);
        row.l1 = l1_texture_error(result, ref, MaskMode::covered);
        row.psnr_db = psnr(result, ref, MaskMode::covered);
    }
    if (cfg.timings)
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    fs::create_directories(cfg.out_dir + "/eval");
    write_eval_csv({row}, cfg.out_dir + "/eval/metrics.csv");
}

// --- train / eval drivers ----------------------------------------------------

struct TrainOutputs {
    TrainResult result;
    std::string final_path, best_path, curve_path;
};

inline TrainOutputs cmd_train(const TrainConfig& cfg, const std::string& out_dir, int scene_resolution = 128) {
    fs::create_directories(out_dir);
    auto train_scenes = standard_corpus(false, scene_resolution, cfg.seed, cfg.workers);
    auto holdout_scenes = standard_corpus(true, scene_resolution, cfg.seed, cfg.workers);
    TrainOutputs out;
    out.result = train(train_scenes, cfg, holdout_scenes);
    out.final_path = out_dir + "/weights_final.stxw";
    out.best_path = out_dir + "/weights_best.stxw";
    out.curve_path = out_dir + "/loss_curve.csv";
    save_weights(out.result.final_weights, out.final_path);
    save_weights(out.result.best_weights, out.best_path);
    write_loss_curve_csv(out.result.curve, out.curve_path);
    return out;
}

enum class AblationMode { none, neighborhood, geodesics };

// eval: holdout metrics for a weights file; ablation modes re-train reduced
// configurations per row (K sweep, geodesics on/off).
inline std::vector<EvalRow> cmd_eval(const std::string& weights_path, const TrainConfig& base_cfg,
                                     const std::string& out_dir, AblationMode ablation,
                                     int scene_resolution = 128, bool timings = false) {
    fs::create_directories(out_dir);
    auto holdout_scenes = standard_corpus(true, scene_resolution, base_cfg.seed, base_cfg.workers);
    std::vector<EvalRow> rows;

    auto eval_with = [&](const NetWeights& w, const TrainConfig& cfg) {
        HoldoutEvalOptions opts;
        opts.bp.K = cfg.K;
        opts.bp.use_geodesics = cfg.use_geodesics;
        opts.bp.workers = cfg.workers;
        opts.aug_lo = cfg.aug_lo;
        opts.aug_hi = cfg.aug_hi;
        opts.seed = cfg.seed;
        auto t0 = std::chrono::steady_clock::now();
        auto part = holdout_eval(w, holdout_scenes, opts);
        if (timings) {
            double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            for (auto& r : part) r.wall_ms = ms / double(part.size());
        }
        rows.insert(rows.end(), part.begin(), part.end());
    };

    if (ablation == AblationMode::none) {
        NetWeights w = load_weights(weights_path);
        eval_with(w, base_cfg);
    } else if (ablation == AblationMode::neighborhood) {
        auto train_scenes = standard_corpus(false, scene_resolution, base_cfg.seed, base_cfg.workers);
        for (int k : {1, 3, 5, 7}) {
            TrainConfig cfg = base_cfg;
            cfg.K = k;
            TrainResult r = train(train_scenes, cfg, holdout_scenes);
            eval_with(r.best_weights, cfg);
        }
    } else {
        auto train_scenes = standard_corpus(false, scene_resolution, base_cfg.seed, base_cfg.workers);
        for (bool geo : {true, false}) {
            TrainConfig cfg = base_cfg;
            cfg.use_geodesics = geo;
            TrainResult r = train(train_scenes, cfg, holdout_scenes);
            eval_with(r.best_weights, cfg);
        }
    }
    write_eval_csv(rows, out_dir + "/metrics.csv");
    return rows;
}

}  // namespace stx

// stx: multi-view texture backprojection toolkit.
//
// Subcommands cover the full pipeline: prepare (inverse-UV artifacts),
// render-views (depth/G-buffer conditioning for an external image generator),
// backproject (heuristic or learned fusion back to texture space), train,
// eval, and pipeline (everything end to end).

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "stx/pipeline.hpp"
#include "stx/stx.hpp"

namespace {

struct CommonArgs {
    stx::PipelineConfig cfg;
    bool geodesic_cache = false;
    std::string manifest;
    std::string strategy = "frontfacing";
    bool no_inpaint = false;
};

void add_perf_flags(CLI::App* cmd, stx::PipelineConfig& cfg) {
    cmd->add_option("--seed", cfg.seed, "RNG seed (all randomness derives from it)");
    cmd->add_option("--workers", cfg.workers, "worker threads; 1 = fully serial reproducibility mode");
}

int run(int argc, char** argv) {
    CLI::App app{"stx - multi-view texture backprojection toolkit"};
    app.require_subcommand(1);

    CommonArgs a;
    stx::TrainConfig tcfg;
    std::string train_config_path, ablation = "none", weights_out = "out";
    int scene_resolution = 128;
    bool timings = false;

    auto* prepare = app.add_subcommand("prepare", "normalize mesh, build inverse-UV texel map + atlas report");
    prepare->add_option("--mesh", a.cfg.mesh_path, "input OBJ")->required();
    prepare->add_option("--out", a.cfg.out_dir, "output directory")->required();
    prepare->add_option("--texture-width", a.cfg.texture_width, "atlas width (default 1024)");
    prepare->add_option("--texture-height", a.cfg.texture_height, "atlas height (default 1024)");
    prepare->add_flag("--geodesic-cache", a.geodesic_cache, "precompute per-texel geodesic fields (STXD)");
    prepare->add_option("--geodesic-radius", a.cfg.geodesic_radius, "geodesic window radius");
    add_perf_flags(prepare, a.cfg);

    auto* render = app.add_subcommand("render-views", "render depth PNGs + G-buffers + views manifest");
    render->add_option("--mesh", a.cfg.mesh_path)->required();
    render->add_option("--out", a.cfg.out_dir)->required();
    render->add_option("--views", a.cfg.view_count, "view count (6 = fixed front/back/sides/top/bottom ring)");
    render->add_option("--resolution", a.cfg.view_resolution, "view resolution (default 512)");
    render->add_option("--camera-file", a.cfg.camera_file, "JSON camera list overriding the preset");
    add_perf_flags(render, a.cfg);

    auto* bp = app.add_subcommand("backproject", "project view images back into the texture atlas");
    bp->add_option("--mesh", a.cfg.mesh_path)->required();
    bp->add_option("--manifest", a.manifest, "views manifest from render-views")->required();
    bp->add_option("--images-dir", a.cfg.images_dir, "directory with the generated view_*.png images");
    bp->add_option("--out", a.cfg.out_dir)->required();
    bp->add_option("--strategy", a.strategy, "frontfacing|average|weighted|neural");
    bp->add_option("--K", a.cfg.K, "neighborhood size (neural strategy, odd)");
    bp->add_option("--thr", a.cfg.thr, "n.v acceptance threshold for heuristics");
    bp->add_option("--power", a.cfg.power, "weighted-average exponent");
    bp->add_option("--weights", a.cfg.weights_path, "STXW weights (required for neural)");
    bp->add_option("--texture-width", a.cfg.texture_width);
    bp->add_option("--texture-height", a.cfg.texture_height);
    bp->add_option("--geodesic-radius", a.cfg.geodesic_radius);
    bp->add_flag("--no-geodesics", [&](size_t) { a.cfg.use_geodesics = false; }, "drop the geodesic feature");
    bp->add_flag("--no-inpaint", a.no_inpaint, "skip pull-push hole filling");
    add_perf_flags(bp, a.cfg);

    auto* train = app.add_subcommand("train", "train backprojection weights on the synthetic corpus");
    train->add_option("--out", weights_out, "output directory")->required();
    train->add_option("--config", train_config_path, "JSON config overriding defaults");
    train->add_option("--epochs", tcfg.epochs);
    train->add_option("--batch-size", tcfg.batch_size);
    train->add_option("--lr", tcfg.lr);
    train->add_option("--K", tcfg.K);
    train->add_option("--texels-per-scene", tcfg.texels_per_scene);
    train->add_option("--scene-resolution", scene_resolution, "synthetic scene atlas resolution");
    train->add_flag("--no-geodesics", [&](size_t) { tcfg.use_geodesics = false; });
    train->add_option("--seed", tcfg.seed);
    train->add_option("--workers", tcfg.workers);

    auto* eval = app.add_subcommand("eval", "holdout metrics / ablation sweeps to CSV");
    eval->add_option("--weights", a.cfg.weights_path, "STXW weights (plain eval mode)");
    eval->add_option("--out", weights_out, "output directory")->required();
    eval->add_option("--ablation", ablation, "none|neighborhood|geodesics");
    eval->add_option("--epochs", tcfg.epochs, "ablation retrain epochs");
    eval->add_option("--texels-per-scene", tcfg.texels_per_scene);
    eval->add_option("--K", tcfg.K);
    eval->add_option("--scene-resolution", scene_resolution);
    eval->add_flag("--timings", timings, "record wall_time_ms (breaks bit-reproducible CSVs)");
    eval->add_option("--seed", tcfg.seed);
    eval->add_option("--workers", tcfg.workers);

    auto* pipe = app.add_subcommand("pipeline", "prepare + render-views + backproject + inpaint + eval");
    pipe->add_option("--mesh", a.cfg.mesh_path)->required();
    pipe->add_option("--out", a.cfg.out_dir)->required();
    pipe->add_option("--images-dir", a.cfg.images_dir, "external generator output (view_*.png)");
    pipe->add_option("--reference-texture", a.cfg.reference_texture,
                     "render views from this texture instead of an external generator");
    pipe->add_option("--strategy", a.strategy);
    pipe->add_option("--K", a.cfg.K);
    pipe->add_option("--thr", a.cfg.thr);
    pipe->add_option("--weights", a.cfg.weights_path);
    pipe->add_option("--texture-width", a.cfg.texture_width);
    pipe->add_option("--texture-height", a.cfg.texture_height);
    pipe->add_option("--resolution", a.cfg.view_resolution);
    pipe->add_flag("--no-geodesics", [&](size_t) { a.cfg.use_geodesics = false; });
    pipe->add_flag("--no-inpaint", a.no_inpaint);
    pipe->add_flag("--timings", timings, "record wall_time_ms (breaks bit-reproducible CSVs)");
    add_perf_flags(pipe, a.cfg);

    CLI11_PARSE(app, argc, argv);

    a.cfg.inpaint = !a.no_inpaint;
    a.cfg.timings = timings;
    a.cfg.strategy = stx::strategy_from_name(a.strategy);

    if (prepare->parsed()) {
        stx::cmd_prepare(a.cfg, a.geodesic_cache);
        std::printf("prepared -> %s\n", a.cfg.out_dir.c_str());
    } else if (render->parsed()) {
        auto manifest = stx::cmd_render_views(a.cfg);
        std::printf("rendered %zu views -> %s\n", manifest.views.size(), a.cfg.out_dir.c_str());
    } else if (bp->parsed()) {
        stx::cmd_backproject(a.cfg, a.manifest, a.cfg.images_dir);
        std::printf("texture -> %s\n", a.cfg.out_dir.c_str());
    } else if (train->parsed()) {
        if (!train_config_path.empty()) {
            stx::TrainConfig file_cfg = stx::load_train_config(train_config_path);
            file_cfg.workers = tcfg.workers;
            tcfg = file_cfg;
        }
        auto out = stx::cmd_train(tcfg, weights_out, scene_resolution);
        std::printf("trained %d epochs, best epoch %d -> %s\n", int(out.result.curve.size()), out.result.best_epoch,
                    out.best_path.c_str());
        if (out.result.diverged) {
            std::fprintf(stderr, "training diverged; kept last good checkpoint\n");
            return 4;
        }
    } else if (eval->parsed()) {
        stx::AblationMode mode = stx::AblationMode::none;
        if (ablation == "neighborhood") mode = stx::AblationMode::neighborhood;
        else if (ablation == "geodesics") mode = stx::AblationMode::geodesics;
        else if (ablation != "none") stx::fail_usage("unknown ablation mode: " + ablation);
        if (mode == stx::AblationMode::none && a.cfg.weights_path.empty())
            stx::fail_usage("eval without --ablation requires --weights");
        auto rows = stx::cmd_eval(a.cfg.weights_path, tcfg, weights_out, mode, scene_resolution, timings);
        std::printf("wrote %zu rows -> %s/metrics.csv\n", rows.size(), weights_out.c_str());
    } else if (pipe->parsed()) {
        stx::run_pipeline(a.cfg);
        std::printf("pipeline -> %s\n", a.cfg.out_dir.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const stx::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        switch (e.kind()) {
            case stx::ErrorKind::usage: return 2;
            case stx::ErrorKind::data: return 3;
            case stx::ErrorKind::numeric: return 4;
        }
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

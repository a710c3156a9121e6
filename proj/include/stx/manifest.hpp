#pragma once

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "stx/camera.hpp"
#include "stx/error.hpp"
#include "stx/trainer.hpp"

namespace stx {

using json = nlohmann::json;

inline json camera_to_json(const Camera& c) {
    return json{{"position", {c.position.x, c.position.y, c.position.z}},
                {"look_at", {c.look_at.x, c.look_at.y, c.look_at.z}},
                {"up", {c.up.x, c.up.y, c.up.z}},
                {"vfov_deg", c.vertical_fov * 180.0 / kPi},
                {"width", c.width},
                {"height", c.height},
                {"near", c.near},
                {"far", c.far},
                {"name", c.name}};
}

inline Vec3d vec3_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) fail_data(strprintf("camera %s: expected [x,y,z]", what));
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Camera camera_from_json(const json& j) {
    Camera c;
    c.position = vec3_from_json(j.at("position"), "position");
    c.look_at = vec3_from_json(j.at("look_at"), "look_at");
    if (j.contains("up")) c.up = vec3_from_json(j.at("up"), "up");
    if (j.contains("vfov_deg")) c.vertical_fov = j.at("vfov_deg").get<double>() * kPi / 180.0;
    if (j.contains("width")) c.width = j.at("width").get<int>();
    if (j.contains("height")) c.height = j.at("height").get<int>();
    if (j.contains("near")) c.near = j.at("near").get<double>();
    if (j.contains("far")) c.far = j.at("far").get<double>();
    if (j.contains("name")) c.name = j.at("name").get<std::string>();
    c.validate();
    return c;
}

// Camera file: either {"cameras":[...]} or a bare JSON array of cameras.
inline std::vector<Camera> load_camera_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open camera file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail_data(strprintf("%s: invalid JSON (%s)", path.c_str(), e.what()));
    }
    const json& arr = j.is_array() ? j : j.at("cameras");
    std::vector<Camera> cams;
    for (const auto& cj : arr) cams.push_back(camera_from_json(cj));
    if (cams.empty()) fail_data(path + ": no cameras");
    return cams;
}

// Views manifest: the contract between render-views and the external image
// generator. `image` paths are filled in (or confirmed) by that tool.
struct ViewsManifestEntry {
    int id = 0;
    Camera camera;
    std::string depth_png;
    std::string gbuffer;
    std::string image;
};

struct ViewsManifest {
    std::string mesh;
    std::vector<ViewsManifestEntry> views;
};

inline void save_views_manifest(const ViewsManifest& m, const std::string& path) {
    json j;
    j["mesh"] = m.mesh;
    j["views"] = json::array();
    for (const auto& v : m.views) {
        j["views"].push_back(json{{"id", v.id},
                                  {"camera", camera_to_json(v.camera)},
                                  {"depth_png", v.depth_png},
                                  {"gbuffer", v.gbuffer},
                                  {"image", v.image}});
    }
    std::ofstream out(path);
    if (!out) fail_data("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

inline ViewsManifest load_views_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open manifest: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail_data(strprintf("%s: invalid JSON (%s)", path.c_str(), e.what()));
    }
    ViewsManifest m;
    m.mesh = j.value("mesh", "");
    for (const auto& vj : j.at("views")) {
        ViewsManifestEntry v;
        v.id = vj.value("id", int(m.views.size()));
        v.camera = camera_from_json(vj.at("camera"));
        v.depth_png = vj.value("depth_png", "");
        v.gbuffer = vj.value("gbuffer", "");
        v.image = vj.value("image", "");
        m.views.push_back(v);
    }
    if (m.views.empty()) fail_data(path + ": manifest lists no views");
    return m;
}

// Training config file: flat key/value JSON mirroring TrainConfig.
inline TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open train config: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail_data(strprintf("%s: invalid JSON (%s)", path.c_str(), e.what()));
    }
    TrainConfig cfg;
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.aug_lo = j.value("aug_lo", cfg.aug_lo);
    cfg.aug_hi = j.value("aug_hi", cfg.aug_hi);
    cfg.aug_fraction = j.value("aug_fraction", cfg.aug_fraction);
    cfg.K = j.value("K", cfg.K);
    cfg.use_geodesics = j.value("geodesics", cfg.use_geodesics);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.texels_per_scene = j.value("texels_per_scene", cfg.texels_per_scene);
    cfg.holdout_texels_per_scene = j.value("holdout_texels_per_scene", cfg.holdout_texels_per_scene);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.validate();
    return cfg;
}

}  // namespace stx

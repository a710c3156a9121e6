#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "stx/error.hpp"
#include "stx/vec.hpp"

namespace stx {

constexpr double kPi = 3.14159265358979323846;

// Pinhole camera. Pixel coordinates are continuous with the origin at the
// top-left image corner, x right, y down; pixel (i,j) has center (i+.5, j+.5).
struct Camera {
    Vec3d position{0, 0, 2};
    Vec3d look_at{0, 0, 0};
    Vec3d up{0, 1, 0};
    double vertical_fov = 45.0 * kPi / 180.0;
    int width = 512;
    int height = 512;
    double near = 0.1;
    double far = 10.0;

    std::string name;  // optional label ("front", ...)

    Vec3d forward() const { return normalized(look_at - position); }
    Vec3d right() const { return normalized(cross(forward(), up)); }
    Vec3d true_up() const { return cross(right(), forward()); }

    void validate() const {
        if (near <= 0 || far <= near) fail_usage("camera: require 0 < near < far");
        if (width < 1 || height < 1) fail_usage("camera: non-positive image size");
        Vec3d f = look_at - position;
        if (norm(f) < 1e-12) fail_usage("camera: position equals look_at");
        if (norm(cross(normalized(f), normalized(up))) < 1e-9)
            fail_usage("camera: view direction parallel to up vector");
    }
};

struct Projection {
    Vec2d pixel;   // continuous pixel coordinates
    double depth;  // view-space depth (distance along the forward axis)
};

// Perspective projection; nullopt for points at or behind the camera plane.
inline std::optional<Projection> project(const Camera& cam, const Vec3d& point) {
    Vec3d d = point - cam.position;
    double depth = dot(d, cam.forward());
    if (depth <= 0.0) return std::nullopt;
    double xv = dot(d, cam.right());
    double yv = dot(d, cam.true_up());
    double half_h = std::tan(cam.vertical_fov * 0.5);
    double half_w = half_h * double(cam.width) / double(cam.height);
    double ndc_x = xv / (depth * half_w);
    double ndc_y = yv / (depth * half_h);
    return Projection{{(ndc_x + 1.0) * 0.5 * cam.width, (1.0 - ndc_y) * 0.5 * cam.height}, depth};
}

// Unit vector from a surface point toward the camera.
inline Vec3d view_vector(const Camera& cam, const Vec3d& point) {
    return normalized(cam.position - point);
}

namespace detail {

inline Camera ring_camera(double azimuth, double elevation, double distance, int res, const std::string& name) {
    Camera c;
    c.position = Vec3d{std::sin(azimuth) * std::cos(elevation), std::sin(elevation),
                       std::cos(azimuth) * std::cos(elevation)} *
                 distance;
    c.look_at = {0, 0, 0};
    c.up = {0, 1, 0};
    c.width = c.height = res;
    c.name = name;
    return c;
}

}  // namespace detail

// Cameras on a sphere around the origin, all looking at it. With count == 6
// and no elevation pattern this reproduces the fixed six-view scheme:
// front, back, left, right, top, bottom (pairs match the iterative schedule).
inline std::vector<Camera> make_view_ring(int count, const std::vector<double>& elevation_pattern = {},
                                          double distance = 2.0, int resolution = 512) {
    if (count < 1) fail_usage("make_view_ring: count must be >= 1");
    std::vector<Camera> cams;
    double deg = kPi / 180.0;
    if (elevation_pattern.empty() && count == 6) {
        cams.push_back(detail::ring_camera(0.0, 0.0, distance, resolution, "front"));
        cams.push_back(detail::ring_camera(180 * deg, 0.0, distance, resolution, "back"));
        cams.push_back(detail::ring_camera(90 * deg, 0.0, distance, resolution, "left"));
        cams.push_back(detail::ring_camera(270 * deg, 0.0, distance, resolution, "right"));
        cams.push_back(detail::ring_camera(0.0, 89 * deg, distance, resolution, "top"));
        cams.push_back(detail::ring_camera(0.0, -89 * deg, distance, resolution, "bottom"));
        return cams;
    }
    for (int i = 0; i < count; ++i) {
        double az = 2.0 * kPi * i / count;
        double el = elevation_pattern.empty() ? 0.0 : elevation_pattern[size_t(i) % elevation_pattern.size()];
        cams.push_back(detail::ring_camera(az, el, distance, resolution, strprintf("view%02d", i)));
    }
    return cams;
}

}  // namespace stx

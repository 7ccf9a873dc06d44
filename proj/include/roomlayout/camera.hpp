#pragma once

#include <array>
#include <optional>
#include <stdexcept>

#include "roomlayout/math.hpp"
#include "roomlayout/plane.hpp"

namespace roomlayout {

// Continuous image coordinates span [0,w]x[0,h]; pixel (i,j) covers
// [i,i+1)x[j,j+1) and is sampled at its center (i+0.5, j+0.5).
struct Pixel {
    double u = 0.0;
    double v = 0.0;
};

struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("intrinsics: fx, fy must be positive");
        if (width < 2 || height < 2) throw std::invalid_argument("intrinsics: image must be at least 2x2");
        if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
            throw std::invalid_argument("intrinsics: principal point outside the image");
    }

    // Unit-z ray through a continuous image location.
    Vec3 ray(double u, double v) const { return {(u - cx) / fx, (v - cy) / fy, 1.0}; }
};

inline constexpr double kProjectionZMin = 1e-4;  // meters

inline std::optional<Pixel> project_point(const CameraIntrinsics& K, const Vec3& p) {
    if (!(p.z > kProjectionZMin)) return std::nullopt;
    return Pixel{K.fx * p.x / p.z + K.cx, K.fy * p.y / p.z + K.cy};
}

inline Vec3 backproject(const CameraIntrinsics& K, const Pixel& px, double depth) {
    if (!(depth > 0.0)) throw std::invalid_argument("backproject: depth must be positive");
    return {(px.u - K.cx) * depth / K.fx, (px.v - K.cy) * depth / K.fy, depth};
}

// The four planes through the camera center and one image border each
// (left, right, top, bottom). Offsets are 0 and normals point into the
// visible volume: every backprojected in-image point has signed distance >= 0.
// Default ids are negative; scene plane ids are non-negative by contract.
inline std::array<PlaneEq, 4> frustum_planes(const CameraIntrinsics& K,
                                             int first_id = -4) {
    K.validate();
    const double w = static_cast<double>(K.width);
    const double h = static_cast<double>(K.height);
    const Vec3 r00 = K.ray(0.0, 0.0);
    const Vec3 rw0 = K.ray(w, 0.0);
    const Vec3 r0h = K.ray(0.0, h);
    const Vec3 rwh = K.ray(w, h);
    const Vec3 center = K.ray(K.cx, K.cy);  // (0,0,1)

    auto make = [&](const Vec3& a, const Vec3& b, int id) {
        Vec3 n = normalized(cross(a, b));
        if (dot(n, center) < 0.0) n = -n;
        return PlaneEq{n, 0.0, PlaneLabel::frustum, id};
    };
    return {
        make(r00, r0h, first_id),      // left  (u = 0)
        make(rw0, rwh, first_id + 1),  // right (u = w)
        make(r00, rw0, first_id + 2),  // top   (v = 0)
        make(r0h, rwh, first_id + 3),  // bottom (v = h)
    };
}

}  // namespace roomlayout

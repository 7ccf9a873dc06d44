#pragma once

#include <optional>
#include <string>

#include "roomlayout/math.hpp"

namespace roomlayout {

enum class PlaneLabel { wall, floor, ceiling, frustum };

inline const char* to_string(PlaneLabel label) {
    switch (label) {
        case PlaneLabel::wall: return "wall";
        case PlaneLabel::floor: return "floor";
        case PlaneLabel::ceiling: return "ceiling";
        case PlaneLabel::frustum: return "frustum";
    }
    return "wall";
}

inline std::optional<PlaneLabel> plane_label_from_string(const std::string& s) {
    if (s == "wall") return PlaneLabel::wall;
    if (s == "floor") return PlaneLabel::floor;
    if (s == "ceiling") return PlaneLabel::ceiling;
    if (s == "frustum") return PlaneLabel::frustum;
    return std::nullopt;
}

// Oriented plane in the camera frame: normal . X = offset, with unit normal.
struct PlaneEq {
    Vec3 normal{0.0, 0.0, 1.0};
    double offset = 0.0;  // meters
    PlaneLabel label = PlaneLabel::wall;
    int id = -1;

    double signed_distance(const Vec3& p) const { return dot(normal, p) - offset; }

    PlaneEq flipped() const { return {-normal, -offset, label, id}; }
};

inline PlaneEq make_plane(const Vec3& normal, double offset, PlaneLabel label, int id) {
    PlaneEq p;
    p.normal = normalized(normal);
    p.offset = offset;
    p.label = label;
    p.id = id;
    return p;
}

// Plane through a point with the given (not necessarily unit) normal direction.
inline PlaneEq plane_through_point(const Vec3& normal, const Vec3& point,
                                   PlaneLabel label, int id) {
    const Vec3 n = normalized(normal);
    return {n, dot(n, point), label, id};
}

struct DegeneracyThresholds {
    double max_parallel_angle_deg = 2.0;  // pairs closer than this count as parallel
    double min_det = 1e-4;                // |det[n1 n2 n3]| below this is a pencil
};

// Intersection point of three planes, or nothing when any pair is almost
// parallel or the three almost intersect on a line.
inline std::optional<Vec3> intersect_three_planes(const PlaneEq& p1, const PlaneEq& p2,
                                                  const PlaneEq& p3,
                                                  const DegeneracyThresholds& limits = {}) {
    const double min_angle = limits.max_parallel_angle_deg * M_PI / 180.0;
    if (undirected_angle(p1.normal, p2.normal) < min_angle) return std::nullopt;
    if (undirected_angle(p1.normal, p3.normal) < min_angle) return std::nullopt;
    if (undirected_angle(p2.normal, p3.normal) < min_angle) return std::nullopt;

    const double det = det3(p1.normal, p2.normal, p3.normal);
    if (std::fabs(det) < limits.min_det) return std::nullopt;

    const Vec3 point = (cross(p2.normal, p3.normal) * p1.offset +
                        cross(p3.normal, p1.normal) * p2.offset +
                        cross(p1.normal, p2.normal) * p3.offset) /
                       det;
    if (!point.finite()) return std::nullopt;
    return point;
}

}  // namespace roomlayout

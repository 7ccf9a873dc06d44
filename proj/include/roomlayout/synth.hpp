#pragma once

// Synthetic scene generator: stands in for the neural front-ends by producing
// plane hypotheses, planar-region masks, and a depth map for parametric rooms,
// together with the exact ground-truth layout. Rooms are vertical prisms over
// a footprint polygon; ground truth is built by provenance-tracked frustum
// clipping of the room faces and cross-checked against an independent
// per-pixel ray cast.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "roomlayout/camera.hpp"
#include "roomlayout/cost.hpp"
#include "roomlayout/layout.hpp"
#include "roomlayout/raster.hpp"
#include "roomlayout/scene_io.hpp"

namespace roomlayout {

enum class SynthPreset { cuboid, lshape, occluded_wall, no_floor, tshape };

inline const char* to_string(SynthPreset p) {
    switch (p) {
        case SynthPreset::cuboid: return "cuboid";
        case SynthPreset::lshape: return "lshape";
        case SynthPreset::occluded_wall: return "occluded-wall";
        case SynthPreset::no_floor: return "no-floor";
        case SynthPreset::tshape: return "tshape";
    }
    return "cuboid";
}

inline std::optional<SynthPreset> synth_preset_from_string(const std::string& s) {
    if (s == "cuboid") return SynthPreset::cuboid;
    if (s == "lshape") return SynthPreset::lshape;
    if (s == "occluded-wall") return SynthPreset::occluded_wall;
    if (s == "no-floor") return SynthPreset::no_floor;
    if (s == "tshape") return SynthPreset::tshape;
    return std::nullopt;
}

struct SynthNoise {
    double plane_angle_deg = 0.0;  // stddev of the plane-normal perturbation
    double depth_sigma_m = 0.0;    // per-pixel Gaussian depth noise
    int mask_erosion_px = 0;       // erosion radius applied to region masks
    std::vector<int> drop_planes;  // plane ids removed from the scene input
    int furniture = 0;             // box occluders resting on the floor
};

struct SynthSpec {
    SynthPreset preset = SynthPreset::cuboid;

    // Base box in meters; presets carve their footprint from it. Zero keeps
    // the preset default.
    double room_width = 0.0;
    double room_depth = 0.0;
    double room_height = 0.0;

    // Camera pose in world coordinates (y down, camera at y = 0, floor at
    // y = +camera_height). NaN keeps the preset default.
    double camera_x = std::numeric_limits<double>::quiet_NaN();
    double camera_z = std::numeric_limits<double>::quiet_NaN();
    double camera_yaw_deg = std::numeric_limits<double>::quiet_NaN();
    double camera_height = 1.5;

    int image_width = 320;
    int image_height = 240;
    double fx = 0.0;  // zero keeps the preset default
    double fy = 0.0;

    SynthNoise noise;
    bool predicted_mode = false;  // flag the depth map as predicted
    uint64_t seed = 0;
};

struct SynthResult {
    SceneInput scene;
    Layout gt;
    // The true occlusion plane of the occluded-wall preset (camera frame),
    // for verifying refinement against the known hidden-edge geometry.
    std::optional<PlaneEq> occlusion_plane;
};

namespace synth_detail {

struct Face {
    int plane_id = -1;
    PlaneLabel label = PlaneLabel::wall;
    Vec3 normal_w;   // outward unit normal, world frame
    double offset_w = 0.0;
    // Wall geometry: footprint edge a->b; floor/ceiling use the footprint.
    Vec2 a, b;       // (x, z)
    bool horizontal = false;
    double y = 0.0;  // plane height for floor/ceiling
};

struct RoomModel {
    std::vector<Vec2> footprint;  // (x, z), outward normals = (e_z, -e_x)
    double y_floor = 0.0;
    double y_ceil = 0.0;
    std::vector<Face> faces;
    int floor_id = -1;
    int ceiling_id = -1;
};

inline bool point_in_footprint(const std::vector<Vec2>& poly, double x, double z) {
    bool inside = false;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& pi = poly[i];
        const Vec2& pj = poly[j];
        if ((pi.y > z) != (pj.y > z)) {
            const double xi = pi.x + (z - pi.y) * (pj.x - pi.x) / (pj.y - pi.y);
            if (x < xi) inside = !inside;
        }
    }
    return inside;
}

inline RoomModel build_room(const std::vector<Vec2>& footprint, double camera_height,
                            double room_height) {
    RoomModel room;
    room.footprint = footprint;
    room.y_floor = camera_height;
    room.y_ceil = camera_height - room_height;

    const size_t n = footprint.size();
    for (size_t k = 0; k < n; ++k) {
        Face wall;
        wall.plane_id = static_cast<int>(k);
        wall.label = PlaneLabel::wall;
        wall.a = footprint[k];
        wall.b = footprint[(k + 1) % n];
        const Vec2 e = wall.b - wall.a;
        const Vec2 out = Vec2{e.y, -e.x} / norm(e);
        wall.normal_w = {out.x, 0.0, out.y};
        wall.offset_w = out.x * wall.a.x + out.y * wall.a.y;
        room.faces.push_back(wall);
    }
    Face floor;
    floor.plane_id = static_cast<int>(n);
    floor.label = PlaneLabel::floor;
    floor.normal_w = {0.0, 1.0, 0.0};  // outward = down
    floor.offset_w = room.y_floor;
    floor.horizontal = true;
    floor.y = room.y_floor;
    room.faces.push_back(floor);
    room.floor_id = floor.plane_id;

    Face ceil = floor;
    ceil.plane_id = static_cast<int>(n) + 1;
    ceil.label = PlaneLabel::ceiling;
    ceil.normal_w = {0.0, -1.0, 0.0};  // outward = up
    ceil.offset_w = -room.y_ceil;
    ceil.y = room.y_ceil;
    room.faces.push_back(ceil);
    room.ceiling_id = ceil.plane_id;
    return room;
}

struct CameraPose {
    Vec3 position;  // world
    double yaw_rad = 0.0;

    Vec3 right() const { return {std::cos(yaw_rad), 0.0, -std::sin(yaw_rad)}; }
    Vec3 down() const { return {0.0, 1.0, 0.0}; }
    Vec3 forward() const { return {std::sin(yaw_rad), 0.0, std::cos(yaw_rad)}; }

    Vec3 to_camera(const Vec3& w) const {
        const Vec3 d = w - position;
        return {dot(right(), d), dot(down(), d), dot(forward(), d)};
    }
    Vec3 dir_to_world(const Vec3& c) const {
        return right() * c.x + down() * c.y + forward() * c.z;
    }
    PlaneEq plane_to_camera(const Vec3& normal_w, double offset_w, PlaneLabel label,
                            int id) const {
        const Vec3 n = {dot(right(), normal_w), dot(down(), normal_w), dot(forward(), normal_w)};
        return {n, offset_w - dot(normal_w, position), label, id};
    }
};

struct AxisBox {
    Vec3 lo, hi;  // world
};

// First-hit distance (camera-frame z) of the world ray against the room
// faces; also reports the face index. dir must have unit camera-z component.
inline bool raycast_room(const RoomModel& room, const Vec3& origin, const Vec3& dir,
                         double* depth, int* face_index) {
    double best = std::numeric_limits<double>::infinity();
    int best_face = -1;
    for (size_t f = 0; f < room.faces.size(); ++f) {
        const Face& face = room.faces[f];
        const double denom = dot(face.normal_w, dir);
        if (std::fabs(denom) < 1e-12) continue;
        const double t = (face.offset_w - dot(face.normal_w, origin)) / denom;
        if (!(t > 1e-6) || t >= best) continue;
        const Vec3 hit = origin + dir * t;
        if (face.horizontal) {
            if (!point_in_footprint(room.footprint, hit.x, hit.z)) continue;
        } else {
            if (hit.y < room.y_ceil - 1e-9 || hit.y > room.y_floor + 1e-9) continue;
            const Vec2 e = face.b - face.a;
            const double len2 = dot(e, e);
            const double s = ((hit.x - face.a.x) * e.x + (hit.z - face.a.y) * e.y) / len2;
            if (s < -1e-9 || s > 1.0 + 1e-9) continue;
        }
        best = t;
        best_face = static_cast<int>(f);
    }
    if (best_face < 0) return false;
    *depth = best;
    *face_index = best_face;
    return true;
}

inline bool raycast_box(const AxisBox& box, const Vec3& origin, const Vec3& dir, double* t_hit) {
    double t0 = 1e-6;
    double t1 = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 3; ++axis) {
        const double o = origin[axis];
        const double d = dir[axis];
        const double lo = box.lo[axis];
        const double hi = box.hi[axis];
        if (std::fabs(d) < 1e-12) {
            if (o < lo || o > hi) return false;
            continue;
        }
        double ta = (lo - o) / d;
        double tb = (hi - o) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::fmax(t0, ta);
        t1 = std::fmin(t1, tb);
        if (t0 > t1) return false;
    }
    *t_hit = t0;
    return true;
}

// Polygon vertex carrying its plane provenance through clipping.
struct PVertex {
    Vec3 p;  // camera frame
    std::array<int, 3> planes{};
};

inline std::array<int, 3> merge_provenance(const std::array<int, 3>& a,
                                           const std::array<int, 3>& b, int clip_plane) {
    std::array<int, 3> out{clip_plane, -1, -1};
    int count = 1;
    for (int pa : a) {
        for (int pb : b) {
            if (pa == pb) {
                bool have = false;
                for (int i = 0; i < count; ++i)
                    if (out[static_cast<size_t>(i)] == pa) have = true;
                if (!have && count < 3) out[static_cast<size_t>(count++)] = pa;
            }
        }
    }
    if (count != 3)
        throw std::logic_error("synth: clip produced a vertex without 3-plane provenance");
    std::sort(out.begin(), out.end());
    return out;
}

// Sutherland-Hodgman against the half-space signed_distance >= 0.
inline std::vector<PVertex> clip_polygon(const std::vector<PVertex>& poly, const PlaneEq& plane) {
    std::vector<PVertex> out;
    const size_t n = poly.size();
    if (n == 0) return out;
    constexpr double eps = 1e-9;
    for (size_t i = 0; i < n; ++i) {
        const PVertex& cur = poly[i];
        const PVertex& nxt = poly[(i + 1) % n];
        const double dc = plane.signed_distance(cur.p);
        const double dn = plane.signed_distance(nxt.p);
        auto cut = [&]() {
            const double t = dc / (dc - dn);
            PVertex v;
            v.p = cur.p + (nxt.p - cur.p) * t;
            v.planes = merge_provenance(cur.planes, nxt.planes, plane.id);
            return v;
        };
        if (dc >= -eps) {
            out.push_back(cur);
            if (dn < -eps && dc > eps) out.push_back(cut());
        } else if (dn > eps) {
            out.push_back(cut());
        }
    }
    // Drop duplicate consecutive vertices introduced by near-boundary cuts.
    std::vector<PVertex> cleaned;
    for (const PVertex& v : out) {
        if (cleaned.empty() || norm(cleaned.back().p - v.p) > 1e-9) cleaned.push_back(v);
    }
    while (cleaned.size() > 1 && norm(cleaned.front().p - cleaned.back().p) < 1e-9)
        cleaned.pop_back();
    return cleaned;
}

inline double polygon_area3(const std::vector<PVertex>& poly) {
    Vec3 acc{0, 0, 0};
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) acc += cross(poly[i].p, poly[(i + 1) % n].p);
    return 0.5 * norm(acc);
}

struct GtPolygon {
    int plane_id = -1;
    std::vector<PVertex> loop;
};

inline Layout assemble_layout(const std::vector<GtPolygon>& polys,
                              const std::vector<PlaneEq>& all_planes) {
    Layout layout;
    std::map<std::array<int, 3>, int> corner_ids;
    std::vector<int> used_planes;

    for (const GtPolygon& gp : polys) {
        Layout::Polygon poly;
        poly.id = static_cast<int>(layout.polygons.size());
        poly.plane = gp.plane_id;
        used_planes.push_back(gp.plane_id);
        for (const PVertex& v : gp.loop) {
            auto it = corner_ids.find(v.planes);
            int cid;
            if (it == corner_ids.end()) {
                Layout::Corner corner;
                corner.id = static_cast<int>(layout.corners.size());
                corner.planes = v.planes;
                corner.point = v.p;
                layout.corners.push_back(corner);
                corner_ids[v.planes] = corner.id;
                cid = corner.id;
                for (int pid : v.planes) used_planes.push_back(pid);
            } else {
                cid = it->second;
                if (norm(layout.corners[static_cast<size_t>(cid)].point - v.p) > 1e-6)
                    throw std::logic_error("synth: inconsistent corner provenance");
            }
            poly.corner_loop.push_back(cid);
        }
        layout.polygons.push_back(std::move(poly));
    }

    std::map<std::array<int, 2>, int> edge_ids;
    for (const Layout::Polygon& poly : layout.polygons) {
        const size_t n = poly.corner_loop.size();
        for (size_t i = 0; i < n; ++i) {
            std::array<int, 2> pair = {poly.corner_loop[i], poly.corner_loop[(i + 1) % n]};
            std::sort(pair.begin(), pair.end());
            if (edge_ids.count(pair)) continue;
            const auto& ca = layout.corners[static_cast<size_t>(pair[0])].planes;
            const auto& cb = layout.corners[static_cast<size_t>(pair[1])].planes;
            std::array<int, 2> shared{};
            int count = 0;
            for (int pa : ca)
                for (int pb : cb)
                    if (pa == pb && count < 2) shared[static_cast<size_t>(count++)] = pa;
            if (count != 2)
                throw std::logic_error(
                    "synth: gt edge without a shared plane pair (degenerate camera pose: a "
                    "seam crosses the image border exactly at a corner ray)");
            Layout::Edge edge;
            edge.id = static_cast<int>(layout.edges.size());
            edge.corners = pair;
            edge.planes = shared;
            layout.edges.push_back(edge);
            edge_ids[pair] = edge.id;
        }
    }

    std::sort(used_planes.begin(), used_planes.end());
    used_planes.erase(std::unique(used_planes.begin(), used_planes.end()), used_planes.end());
    for (int pid : used_planes) {
        for (const PlaneEq& p : all_planes)
            if (p.id == pid) layout.planes.push_back(p);
    }
    return layout;
}

inline void erode_mask(BitMask& mask, int radius) {
    for (int pass = 0; pass < radius; ++pass) {
        BitMask out(mask.width(), mask.height());
        for (int y = 0; y < mask.height(); ++y) {
            for (int x = 0; x < mask.width(); ++x) {
                if (!mask.get(x, y)) continue;
                bool keep = true;
                for (int dy = -1; dy <= 1 && keep; ++dy)
                    for (int dx = -1; dx <= 1 && keep; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (!mask.in_bounds(nx, ny) || !mask.get(nx, ny)) keep = false;
                    }
                if (keep) out.set(x, y);
            }
        }
        mask = out;
    }
}

struct PresetDefaults {
    std::vector<Vec2> footprint;
    double room_height = 2.5;
    double cam_x = 0.0, cam_z = 0.0, yaw_deg = 0.0;
    double fx = 190.7, fy = 190.7;
};

inline PresetDefaults preset_defaults(SynthPreset preset, double W, double D, double H) {
    PresetDefaults d;
    d.room_height = H;
    switch (preset) {
        case SynthPreset::cuboid:
            // Slightly off-center camera keeps the seams in generic position
            // relative to the image border rays.
            d.footprint = {{0, 0}, {W, 0}, {W, D}, {0, D}};
            d.cam_x = 0.45 * W;
            d.cam_z = 0.75;
            break;
        case SynthPreset::lshape: {
            const double Wn = 0.5 * W, D1 = 0.6 * D;
            d.footprint = {{0, 0}, {W, 0}, {W, D1}, {Wn, D1}, {Wn, D}, {0, D}};
            d.cam_x = 0.3 * W;
            d.cam_z = 0.8;
            break;
        }
        case SynthPreset::occluded_wall: {
            const double Wn = 0.5 * W, D1 = 0.6 * D;
            d.footprint = {{0, 0}, {W, 0}, {W, D1}, {Wn, D1}, {Wn, D}, {0, D}};
            d.cam_x = 0.75 * W;
            d.cam_z = 0.5;
            break;
        }
        case SynthPreset::no_floor:
            // Short, deep room seen from near the entrance: the wall band is
            // small against the floor area, so covering the floor with wall
            // extensions is expensive and the fallback floor wins clearly.
            d.footprint = {{0, 0}, {W, 0}, {W, D}, {0, D}};
            d.room_height = std::min(H, 1.9);
            d.cam_x = 0.47 * W;
            d.cam_z = 0.7;
            d.fx = 140.0;
            d.fy = 120.0;
            break;
        case SynthPreset::tshape: {
            // Head along x, stem behind the camera's field of view.
            d.footprint = {{0, 0},   {6, 0},   {6, 3},   {1.2, 3},
                           {1.2, 5}, {0.2, 5}, {0.2, 3}, {0, 3}};
            d.cam_x = 0.7;
            d.cam_z = 1.5;
            d.yaw_deg = 90.0;
            d.fx = 228.5;
            d.fy = 228.5;
            break;
        }
    }
    return d;
}

}  // namespace synth_detail

inline SynthResult generate_scene(const SynthSpec& spec) {
    using namespace synth_detail;

    const double W = spec.room_width > 0.0 ? spec.room_width : 4.0;
    const double D = spec.room_depth > 0.0 ? spec.room_depth
                                           : (spec.preset == SynthPreset::no_floor ? 6.0 : 5.0);
    const double H = spec.room_height > 0.0 ? spec.room_height : 2.5;
    PresetDefaults defaults = preset_defaults(spec.preset, W, D, H);

    if (!std::isnan(spec.camera_x)) defaults.cam_x = spec.camera_x;
    if (!std::isnan(spec.camera_z)) defaults.cam_z = spec.camera_z;
    if (!std::isnan(spec.camera_yaw_deg)) defaults.yaw_deg = spec.camera_yaw_deg;

    CameraIntrinsics K;
    K.width = spec.image_width;
    K.height = spec.image_height;
    K.fx = spec.fx > 0.0 ? spec.fx : defaults.fx;
    K.fy = spec.fy > 0.0 ? spec.fy : defaults.fy;
    K.cx = 0.5 * K.width;
    K.cy = 0.5 * K.height;
    K.validate();

    const RoomModel room = build_room(defaults.footprint, spec.camera_height, defaults.room_height);
    CameraPose cam;
    cam.position = {defaults.cam_x, 0.0, defaults.cam_z};
    cam.yaw_rad = defaults.yaw_deg * M_PI / 180.0;

    if (!point_in_footprint(room.footprint, cam.position.x, cam.position.z) ||
        !(room.y_ceil < 0.0 && room.y_floor > 0.0))
        throw std::invalid_argument("generate_scene: camera pose outside the room");

    // Camera-frame planes, one per face, outward normals (offset > 0 inside).
    std::vector<PlaneEq> cam_planes;
    for (const Face& f : room.faces)
        cam_planes.push_back(cam.plane_to_camera(f.normal_w, f.offset_w, f.label, f.plane_id));

    // The occlusion plane of the occluded-wall preset: through the camera
    // center and the vertical junction edge of the L footprint.
    std::optional<PlaneEq> occlusion_plane_cam;
    const int ghost_id = static_cast<int>(room.faces.size());
    if (spec.preset == SynthPreset::occluded_wall) {
        const double Wn = 0.5 * W, D1 = 0.6 * D;
        const Vec3 edge_point{Wn, 0.0, D1};
        const Vec3 n_w = normalized(cross(Vec3{0, 1, 0}, edge_point - cam.position));
        PlaneEq world{n_w, dot(n_w, cam.position), PlaneLabel::wall, ghost_id};
        PlaneEq in_cam = cam.plane_to_camera(world.normal, world.offset, PlaneLabel::wall, ghost_id);
        // Orient toward the visible side of the far wall (negative on the
        // junction-wall side, whose interior midpoint is known).
        const Vec3 junction_mid = cam.to_camera({0.5 * (Wn + W), 0.5 * (room.y_floor + room.y_ceil), D1});
        if (in_cam.signed_distance(junction_mid) > 0.0) in_cam = in_cam.flipped();
        occlusion_plane_cam = in_cam;
    }

    // Ground-truth polygons: visible faces clipped by the frustum (and, for
    // the occluded preset, by the occlusion plane where the junction wall
    // hides the narrow arm).
    const auto frustum = frustum_planes(K);
    std::vector<GtPolygon> gt_polys;
    const double Wn = 0.5 * W, D1 = 0.6 * D;

    for (const Face& face : room.faces) {
        const PlaneEq& plane_cam = cam_planes[static_cast<size_t>(face.plane_id)];
        if (plane_cam.offset <= 1e-9) continue;  // backfacing

        std::vector<PVertex> poly;
        auto wall_neighbor = [&](size_t idx) {
            return static_cast<int>(idx % room.footprint.size());
        };
        if (face.label == PlaneLabel::wall) {
            const size_t k = static_cast<size_t>(face.plane_id);
            const size_t n = room.footprint.size();
            int prev = wall_neighbor(k + n - 1);
            int next = wall_neighbor(k + 1);
            // The junction wall of the occluded preset ends at the occlusion
            // edge; the hidden arm wall is unmodeled, so the corner identity
            // there uses the occlusion plane (which contains that edge).
            if (spec.preset == SynthPreset::occluded_wall) {
                if (next == 3) next = ghost_id;
                if (prev == 3) prev = ghost_id;
            }
            const Vec3 a_floor{face.a.x, room.y_floor, face.a.y};
            const Vec3 b_floor{face.b.x, room.y_floor, face.b.y};
            const Vec3 b_ceil{face.b.x, room.y_ceil, face.b.y};
            const Vec3 a_ceil{face.a.x, room.y_ceil, face.a.y};
            auto tri = [&](int w2, int hf) {
                std::array<int, 3> t = {face.plane_id, w2, hf};
                std::sort(t.begin(), t.end());
                return t;
            };
            poly = {{cam.to_camera(a_floor), tri(prev, room.floor_id)},
                    {cam.to_camera(b_floor), tri(next, room.floor_id)},
                    {cam.to_camera(b_ceil), tri(next, room.ceiling_id)},
                    {cam.to_camera(a_ceil), tri(prev, room.ceiling_id)}};
        } else {
            const size_t n = room.footprint.size();
            if (spec.preset == SynthPreset::occluded_wall) {
                // Visible footprint: follow the occlusion line from the
                // junction edge to the far wall instead of the hidden arm.
                const double x_cut = cam.position.x + (Wn - cam.position.x) *
                                                          (D - cam.position.z) /
                                                          (D1 - cam.position.z);
                const int horiz = face.plane_id;
                // Footprint vertex (x,z) provenance: the two adjacent walls.
                auto tri = [&](int w1, int w2) {
                    std::array<int, 3> t = {horiz, w1, w2};
                    std::sort(t.begin(), t.end());
                    return t;
                };
                const double y = face.y;
                // Walls: 0:(0,0)->(W,0) 1:(W,0)->(W,D1) 2:(W,D1)->(Wn,D1)
                //        3:(Wn,D1)->(Wn,D) 4:(Wn,D)->(0,D) 5:(0,D)->(0,0)
                std::vector<PVertex> base = {
                    {cam.to_camera({0, y, 0}), tri(5, 0)},
                    {cam.to_camera({W, y, 0}), tri(0, 1)},
                    {cam.to_camera({W, y, D1}), tri(1, 2)},
                    {cam.to_camera({Wn, y, D1}), tri(2, ghost_id)},
                    {cam.to_camera({x_cut, y, D}), tri(ghost_id, 4)},
                    {cam.to_camera({0, y, D}), tri(4, 5)},
                };
                poly = base;
            } else {
                for (size_t k = 0; k < n; ++k) {
                    const int prev = wall_neighbor(k + n - 1);
                    const int cur = wall_neighbor(k);
                    std::array<int, 3> t = {face.plane_id, prev, cur};
                    std::sort(t.begin(), t.end());
                    poly.push_back({cam.to_camera({room.footprint[k].x, face.y,
                                                   room.footprint[k].y}),
                                    t});
                }
            }
            if (face.label == PlaneLabel::ceiling) std::reverse(poly.begin(), poly.end());
        }

        if (spec.preset == SynthPreset::occluded_wall && occlusion_plane_cam) {
            // The far wall is partially hidden behind the junction wall.
            const size_t k = static_cast<size_t>(face.plane_id);
            const bool is_far_wall = face.label == PlaneLabel::wall && k == 4;  // (Wn,D)->(0,D)
            const bool is_hidden_arm_wall = face.label == PlaneLabel::wall && k == 3;
            if (is_hidden_arm_wall) continue;  // backfacing anyway
            if (is_far_wall) poly = clip_polygon(poly, *occlusion_plane_cam);
        }

        for (const PlaneEq& f : frustum) poly = clip_polygon(poly, f);
        if (poly.size() < 3 || polygon_area3(poly) < 1e-6) continue;
        gt_polys.push_back({face.plane_id, std::move(poly)});
    }

    std::vector<PlaneEq> provenance_planes = cam_planes;
    if (occlusion_plane_cam) provenance_planes.push_back(*occlusion_plane_cam);
    for (const PlaneEq& f : frustum) provenance_planes.push_back(f);
    Layout gt = assemble_layout(gt_polys, provenance_planes);

    // Map face plane id -> gt polygon id for the label cross-check.
    std::map<int, int> plane_to_polygon;
    for (const Layout::Polygon& p : gt.polygons) plane_to_polygon[p.plane] = p.id;

    // Furniture boxes, seeded; they only affect the measured depth map.
    std::mt19937_64 rng(spec.seed);
    std::vector<AxisBox> furniture;
    {
        std::uniform_real_distribution<double> ux(0.15, 0.85);
        std::uniform_real_distribution<double> uz(0.35, 0.8);
        std::uniform_real_distribution<double> usize(0.3, 0.8);
        for (int i = 0; i < spec.noise.furniture; ++i) {
            const double sx = usize(rng), sy = usize(rng), sz = usize(rng);
            const Vec3 fwd = cam.forward();
            const Vec3 center = cam.position + fwd * (uz(rng) * 4.0 + 1.0) +
                                cam.right() * ((ux(rng) - 0.5) * 3.0);
            AxisBox box;
            box.lo = {center.x - 0.5 * sx, room.y_floor - sy, center.z - 0.5 * sz};
            box.hi = {center.x + 0.5 * sx, room.y_floor, center.z + 0.5 * sz};
            if (!point_in_footprint(room.footprint, box.lo.x, box.lo.z) ||
                !point_in_footprint(room.footprint, box.hi.x, box.hi.z))
                continue;
            furniture.push_back(box);
        }
    }

    // Exact per-pixel ray cast: layout depth/label plus the measured depth
    // with furniture in front.
    DepthMap layout_depth(K.width, K.height, 0.0f);
    LabelMap layout_labels(K.width, K.height, kBackground);
    DepthMap measured(K.width, K.height, 0.0f);
    LabelMap measured_is_furniture(K.width, K.height, 0);
    for (int y = 0; y < K.height; ++y) {
        for (int x = 0; x < K.width; ++x) {
            const Vec3 dir = cam.dir_to_world(K.ray(x + 0.5, y + 0.5));
            double t;
            int face_index;
            if (!raycast_room(room, cam.position, dir, &t, &face_index)) continue;
            const int plane_id = room.faces[static_cast<size_t>(face_index)].plane_id;
            auto it = plane_to_polygon.find(plane_id);
            layout_depth.at(x, y) = static_cast<float>(t);
            layout_labels.at(x, y) = it == plane_to_polygon.end() ? kBackground : it->second;

            double t_m = t;
            for (const AxisBox& box : furniture) {
                double tb;
                if (raycast_box(box, cam.position, dir, &tb) && tb < t_m) {
                    t_m = tb;
                    measured_is_furniture.at(x, y) = 1;
                }
            }
            measured.at(x, y) = static_cast<float>(t_m);
        }
    }

    // Cross-check the constructed gt polygons against the ray cast.
    {
        std::vector<RenderPoly> rp = layout_to_render_polys(gt, K);
        auto [rendered_depth, rendered_labels] = render_layout_depth(rp, K);
        size_t mismatched = 0;
        for (size_t i = 0; i < rendered_labels.size(); ++i)
            if (rendered_labels.data[i] != layout_labels.data[i]) ++mismatched;
        if (static_cast<double>(mismatched) > 0.01 * static_cast<double>(rendered_labels.size()))
            throw std::logic_error("generate_scene: gt polygons disagree with the ray cast");
    }

    // Regions: layout label restricted to layout classes, minus furniture.
    std::map<int, BitMask> region_masks;
    for (const Layout::Polygon& p : gt.polygons) region_masks.emplace(p.plane, BitMask(K.width, K.height));
    for (int y = 0; y < K.height; ++y) {
        for (int x = 0; x < K.width; ++x) {
            const int32_t label = layout_labels.at(x, y);
            if (label == kBackground || measured_is_furniture.at(x, y)) continue;
            const int plane_id = gt.polygons[static_cast<size_t>(label)].plane;
            region_masks.at(plane_id).set(x, y);
        }
    }

    // Degradations.
    std::vector<int> dropped = spec.noise.drop_planes;
    if (spec.preset == SynthPreset::no_floor) dropped.push_back(room.floor_id);
    std::sort(dropped.begin(), dropped.end());

    std::normal_distribution<double> angle_noise(0.0, spec.noise.plane_angle_deg * M_PI / 180.0);
    std::uniform_real_distribution<double> axis_pick(0.0, 2.0 * M_PI);

    SceneInput scene;
    scene.intrinsics = K;
    scene.mode = spec.predicted_mode ? DepthSource::predicted : DepthSource::measured;

    for (auto& [plane_id, mask] : region_masks) {
        if (std::binary_search(dropped.begin(), dropped.end(), plane_id)) continue;
        if (spec.noise.mask_erosion_px > 0) erode_mask(mask, spec.noise.mask_erosion_px);
        if (mask.count() < 8) continue;

        PlaneEq plane = cam_planes[static_cast<size_t>(plane_id)];
        if (spec.noise.plane_angle_deg > 0.0) {
            // Pivot the plane about the visible region's 3D centroid.
            Vec3 centroid{0, 0, 0};
            size_t count = 0;
            mask.for_each_set([&](int x, int y) {
                const float dmap = layout_depth.at(x, y);
                if (!depth_valid(dmap)) return;
                centroid += backproject(K, Pixel{x + 0.5, y + 0.5}, dmap);
                ++count;
            });
            if (count > 0) {
                centroid = centroid / static_cast<double>(count);
                const double angle = angle_noise(rng);
                const double phase = axis_pick(rng);
                const PlaneChart chart(plane);
                const Vec3 axis = chart.u * std::cos(phase) + chart.v * std::sin(phase);
                // Rodrigues rotation of the normal about an in-plane axis.
                const Vec3 n = plane.normal;
                const Vec3 rotated = n * std::cos(angle) + cross(axis, n) * std::sin(angle) +
                                     axis * (dot(axis, n) * (1.0 - std::cos(angle)));
                plane.normal = normalized(rotated);
                plane.offset = dot(plane.normal, centroid);
                if (plane.offset < 0.0) plane = plane.flipped();
            }
        }
        scene.planes.push_back(plane);
        scene.regions.regions.push_back({plane_id, std::move(mask)});
    }
    scene.regions.build_union(K.width, K.height);

    // Measured depth: optional noise, plus invalid bands along furniture
    // silhouettes (RGBD sensors lose depth around object edges).
    if (spec.noise.depth_sigma_m > 0.0) {
        std::normal_distribution<double> depth_noise(0.0, spec.noise.depth_sigma_m);
        for (float& v : measured.data)
            if (depth_valid(v)) v = static_cast<float>(std::fmax(0.01, v + depth_noise(rng)));
    }
    if (!furniture.empty()) {
        DepthMap holes = measured;
        for (int y = 0; y < K.height; ++y) {
            for (int x = 0; x < K.width; ++x) {
                if (!measured_is_furniture.at(x, y)) continue;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (measured.in_bounds(nx, ny) && !measured_is_furniture.at(nx, ny))
                            holes.at(nx, ny) = 0.0f;  // invalid
                    }
            }
        }
        measured = holes;
    }
    scene.depth = std::move(measured);

    SynthResult result;
    result.scene = std::move(scene);
    result.gt = std::move(gt);
    result.occlusion_plane = occlusion_plane_cam;
    return result;
}

}  // namespace roomlayout

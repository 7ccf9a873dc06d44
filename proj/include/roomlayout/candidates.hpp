#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "roomlayout/camera.hpp"
#include "roomlayout/plane.hpp"

namespace roomlayout {

// A corner is identified by the unordered triple of planes that generated it;
// the 3D point and its projection are derived data.
struct CornerCandidate {
    int id = -1;
    std::array<int, 3> planes{};  // ascending plane ids
    Vec3 point;
    Pixel pixel;
};

struct EdgeCandidate {
    int id = -1;
    std::array<int, 2> corners{};        // ascending corner ids
    std::array<int, 2> shared_planes{};  // ascending plane ids
};

struct PolygonCandidate {
    int id = -1;
    int plane = -1;
    std::vector<int> loop;   // cyclic corner ids, canonical order
    std::vector<int> edges;  // edge ids, edges[k] joins loop[k] and loop[k+1]
    double area_px = -1.0;   // rasterized projected area, filled at precompute
};

struct CandidateWarning {
    int plane_id = -1;
    std::string message;
};

struct CandidateGenOptions {
    DegeneracyThresholds degeneracy;
    double min_corner_depth = 0.05;   // meters
    double border_slack_px = 0.5;     // in-image test slack
    double merge_distance = 1e-4;     // meters; coincident corners merged
    int max_cycles_per_plane = 512;   // enumeration cap
    int max_polygon_vertices = 16;
    long max_search_steps_per_plane = 2'000'000;  // pathological-input guard
};

struct CandidateSet {
    std::vector<PlaneEq> planes;  // sorted by id
    std::vector<CornerCandidate> corners;
    std::vector<EdgeCandidate> edges;
    std::vector<PolygonCandidate> polygons;
    std::vector<CandidateWarning> warnings;

    const PlaneEq& plane_by_id(int id) const {
        for (const PlaneEq& p : planes)
            if (p.id == id) return p;
        throw std::logic_error("CandidateSet: unknown plane id " + std::to_string(id));
    }
    const CornerCandidate& corner(int id) const { return corners.at(static_cast<size_t>(id)); }
    const EdgeCandidate& edge(int id) const { return edges.at(static_cast<size_t>(id)); }

    // Projected corner loop of a polygon, in continuous image coordinates.
    std::vector<Vec2> loop_pixels(const PolygonCandidate& poly) const {
        std::vector<Vec2> out;
        out.reserve(poly.loop.size());
        for (int cid : poly.loop) {
            const Pixel& px = corner(cid).pixel;
            out.push_back({px.u, px.v});
        }
        return out;
    }
    std::vector<Vec3> loop_points(const PolygonCandidate& poly) const {
        std::vector<Vec3> out;
        out.reserve(poly.loop.size());
        for (int cid : poly.loop) out.push_back(corner(cid).point);
        return out;
    }
};

// Orthonormal 2D chart on a plane; distances and areas are preserved.
struct PlaneChart {
    Vec3 origin;
    Vec3 u;
    Vec3 v;

    explicit PlaneChart(const PlaneEq& plane) {
        origin = plane.normal * plane.offset;
        const Vec3 n = plane.normal;
        Vec3 pick = std::fabs(n.x) <= std::fabs(n.y) && std::fabs(n.x) <= std::fabs(n.z)
                        ? Vec3{1, 0, 0}
                        : (std::fabs(n.y) <= std::fabs(n.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
        u = normalized(cross(n, pick));
        v = cross(n, u);
    }

    Vec2 to_2d(const Vec3& p) const {
        const Vec3 d = p - origin;
        return {dot(u, d), dot(v, d)};
    }
    Vec3 to_3d(const Vec2& q) const { return origin + u * q.x + v * q.y; }
};

// All non-adjacent segment pairs of the loop must be disjoint.
inline bool loop_is_simple(const std::vector<Vec2>& loop) {
    const size_t n = loop.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a0 = loop[i];
        const Vec2& a1 = loop[(i + 1) % n];
        // Degenerate (zero-length) segments make the loop non-simple.
        if (norm(a1 - a0) < 1e-12) return false;
        for (size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (segments_intersect(a0, a1, loop[j], loop[(j + 1) % n])) return false;
        }
    }
    // Folded-back adjacent segments (shared endpoint, opposite directions).
    for (size_t i = 0; i < n; ++i) {
        const Vec2 d0 = loop[(i + 1) % n] - loop[i];
        const Vec2 d1 = loop[(i + 2) % n] - loop[(i + 1) % n];
        if (std::fabs(cross(d0, d1)) < 1e-12 && dot(d0, d1) < 0.0) return false;
    }
    return true;
}

// All non-degenerate triplet intersections that survive the positive-depth
// and in-image filters. Triplets of frustum planes (and frustum pairs whose
// intersection is the camera center itself) are excluded.
inline std::vector<CornerCandidate> generate_corners(const std::vector<PlaneEq>& planes,
                                                     const CameraIntrinsics& K,
                                                     const CandidateGenOptions& opts = {}) {
    std::vector<const PlaneEq*> sorted;
    sorted.reserve(planes.size());
    for (const PlaneEq& p : planes) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(),
              [](const PlaneEq* a, const PlaneEq* b) { return a->id < b->id; });
    for (size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i]->id == sorted[i - 1]->id)
            throw std::invalid_argument("generate_corners: duplicate plane id");

    const double w = static_cast<double>(K.width);
    const double h = static_cast<double>(K.height);
    std::vector<CornerCandidate> out;

    const size_t n = sorted.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            for (size_t k = j + 1; k < n; ++k) {
                const PlaneEq& p1 = *sorted[i];
                const PlaneEq& p2 = *sorted[j];
                const PlaneEq& p3 = *sorted[k];
                const int frustum_count = (p1.label == PlaneLabel::frustum) +
                                          (p2.label == PlaneLabel::frustum) +
                                          (p3.label == PlaneLabel::frustum);
                if (frustum_count == 3) continue;

                auto point = intersect_three_planes(p1, p2, p3, opts.degeneracy);
                if (!point) continue;
                if (frustum_count >= 2 && norm(*point) < 1e-6) continue;  // camera center
                if (!(point->z > opts.min_corner_depth)) continue;

                auto px = project_point(K, *point);
                if (!px) continue;
                if (px->u < -opts.border_slack_px || px->u > w + opts.border_slack_px ||
                    px->v < -opts.border_slack_px || px->v > h + opts.border_slack_px)
                    continue;

                CornerCandidate c;
                c.planes = {p1.id, p2.id, p3.id};
                c.point = *point;
                c.pixel = *px;
                out.push_back(c);
            }
        }
    }

    // Merge numerically coincident corners: keep the lexicographically
    // smallest plane triple as the representative.
    std::sort(out.begin(), out.end(),
              [](const CornerCandidate& a, const CornerCandidate& b) { return a.planes < b.planes; });
    std::vector<CornerCandidate> merged;
    for (const CornerCandidate& c : out) {
        bool duplicate = false;
        for (const CornerCandidate& kept : merged) {
            if (norm(kept.point - c.point) < opts.merge_distance) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) merged.push_back(c);
    }
    for (size_t i = 0; i < merged.size(); ++i) merged[i].id = static_cast<int>(i);
    return merged;
}

// One edge per corner pair whose plane-triple intersection has size exactly 2.
inline std::vector<EdgeCandidate> generate_edges(const std::vector<CornerCandidate>& corners) {
    std::vector<EdgeCandidate> out;
    const size_t n = corners.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            std::array<int, 2> shared{};
            int count = 0;
            for (int p : corners[i].planes) {
                for (int q : corners[j].planes) {
                    if (p == q) {
                        if (count < 2) shared[count] = p;
                        ++count;
                    }
                }
            }
            if (count != 2) continue;
            EdgeCandidate e;
            e.id = static_cast<int>(out.size());
            e.corners = {corners[i].id, corners[j].id};
            e.shared_planes = shared;
            std::sort(e.shared_planes.begin(), e.shared_planes.end());
            out.push_back(e);
        }
    }
    return out;
}

namespace detail {

struct CycleEnumerator {
    const std::vector<int>& vertex_ids;            // corner ids, ascending
    const std::map<int, std::vector<int>>& adj;    // corner id -> sorted neighbor ids
    const std::map<std::pair<int, int>, std::array<int, 2>>& edge_pairs;
    int max_vertices;
    int max_cycles;
    long max_steps;

    std::vector<std::vector<int>> cycles;
    bool capped = false;
    long steps = 0;

    std::vector<int> path;
    std::vector<std::array<int, 2>> path_pairs;  // plane pair of each path edge
    std::set<int> on_path;
    int target_length = 3;

    // Straight-through vertices (two consecutive edges on the same plane
    // pair) only duplicate the loop without them, so such continuations are
    // pruned during the walk; collinear corner cliques stay tractable.
    void dfs(int current, int start) {
        if (capped) return;
        if (++steps > max_steps) {
            capped = true;
            return;
        }
        auto it = adj.find(current);
        if (it == adj.end()) return;
        for (int next : it->second) {
            if (capped) return;
            const auto& pair = edge_pairs.at({current, next});
            if (!path_pairs.empty() && path_pairs.back() == pair) continue;
            if (next == start) {
                if (static_cast<int>(path.size()) == target_length && path[1] < path.back() &&
                    path_pairs.front() != pair) {
                    cycles.push_back(path);
                    if (static_cast<int>(cycles.size()) >= max_cycles) {
                        capped = true;
                        return;
                    }
                }
                continue;
            }
            if (next < start || on_path.count(next)) continue;
            if (static_cast<int>(path.size()) >= target_length) continue;
            path.push_back(next);
            path_pairs.push_back(pair);
            on_path.insert(next);
            dfs(next, start);
            on_path.erase(next);
            path_pairs.pop_back();
            path.pop_back();
        }
    }

    // Iterative deepening by cycle length: under the enumeration cap every
    // shorter loop is emitted before any longer one, so truncation drops the
    // least plausible candidates first.
    void run() {
        for (target_length = 3; target_length <= max_vertices; ++target_length) {
            for (int s : vertex_ids) {
                if (capped) return;
                path = {s};
                path_pairs.clear();
                on_path = {s};
                dfs(s, s);
            }
        }
    }
};

}  // namespace detail

// Per non-frustum plane, enumerate simple cycles of that plane's corner/edge
// graph; keep cycles that embed as simple polygons in the plane's 2D chart.
// Planes through the camera center cannot carry image-area polygons, so
// frustum planes are skipped.
inline std::vector<PolygonCandidate> generate_polygons(
    const std::vector<CornerCandidate>& corners, const std::vector<EdgeCandidate>& edges,
    const std::vector<PlaneEq>& planes, const CameraIntrinsics& /*K*/,
    std::vector<CandidateWarning>* warnings = nullptr, const CandidateGenOptions& opts = {}) {
    // Planes through the camera center (frustum planes and refinement-added
    // occlusion planes) project edge-on: they bound polygons but never carry
    // image-area polygons themselves.
    std::vector<const PlaneEq*> sorted;
    for (const PlaneEq& p : planes)
        if (p.label != PlaneLabel::frustum && std::fabs(p.offset) > 1e-9) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(),
              [](const PlaneEq* a, const PlaneEq* b) { return a->id < b->id; });

    std::vector<PolygonCandidate> out;

    for (const PlaneEq* plane : sorted) {
        // Subgraph of this plane.
        std::vector<int> vertex_ids;
        for (const CornerCandidate& c : corners)
            if (std::find(c.planes.begin(), c.planes.end(), plane->id) != c.planes.end())
                vertex_ids.push_back(c.id);
        std::sort(vertex_ids.begin(), vertex_ids.end());

        std::map<int, std::vector<int>> adj;
        std::map<std::pair<int, int>, const EdgeCandidate*> edge_lookup;
        std::map<std::pair<int, int>, std::array<int, 2>> edge_pairs;
        for (const EdgeCandidate& e : edges) {
            if (e.shared_planes[0] != plane->id && e.shared_planes[1] != plane->id) continue;
            adj[e.corners[0]].push_back(e.corners[1]);
            adj[e.corners[1]].push_back(e.corners[0]);
            edge_lookup[{e.corners[0], e.corners[1]}] = &e;
            edge_lookup[{e.corners[1], e.corners[0]}] = &e;
            edge_pairs[{e.corners[0], e.corners[1]}] = e.shared_planes;
            edge_pairs[{e.corners[1], e.corners[0]}] = e.shared_planes;
        }
        for (auto& [id, nbrs] : adj) std::sort(nbrs.begin(), nbrs.end());

        detail::CycleEnumerator enumerator{vertex_ids, adj, edge_pairs,
                                           opts.max_polygon_vertices,
                                           opts.max_cycles_per_plane,
                                           opts.max_search_steps_per_plane};
        enumerator.run();
        if (enumerator.capped && warnings)
            warnings->push_back({plane->id, "cycle enumeration cap reached on plane " +
                                                std::to_string(plane->id)});

        const PlaneChart chart(*plane);
        std::set<std::vector<int>> seen;

        for (const std::vector<int>& cycle : enumerator.cycles) {
            const size_t n = cycle.size();

            std::vector<Vec2> loop2d;
            loop2d.reserve(n);
            for (int cid : cycle) loop2d.push_back(chart.to_2d(corners[static_cast<size_t>(cid)].point));
            if (!loop_is_simple(loop2d)) continue;

            // Canonical form: smallest corner id first, direction with the
            // smaller second element.
            std::vector<int> canon = cycle;
            const auto min_it = std::min_element(canon.begin(), canon.end());
            std::rotate(canon.begin(), min_it, canon.end());
            if (canon.size() > 2 && canon[1] > canon.back()) {
                std::reverse(canon.begin() + 1, canon.end());
            }
            if (!seen.insert(canon).second) continue;

            PolygonCandidate poly;
            poly.plane = plane->id;
            poly.loop = canon;
            for (size_t i = 0; i < n; ++i)
                poly.edges.push_back(edge_lookup.at({canon[i], canon[(i + 1) % n]})->id);
            out.push_back(std::move(poly));
        }
    }

    for (size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
    return out;
}

// Convenience wrapper building the full candidate set from a plane list.
inline CandidateSet generate_candidates(const std::vector<PlaneEq>& planes,
                                        const CameraIntrinsics& K,
                                        const CandidateGenOptions& opts = {}) {
    CandidateSet set;
    set.planes = planes;
    std::sort(set.planes.begin(), set.planes.end(),
              [](const PlaneEq& a, const PlaneEq& b) { return a.id < b.id; });
    set.corners = generate_corners(set.planes, K, opts);
    set.edges = generate_edges(set.corners);
    set.polygons = generate_polygons(set.corners, set.edges, set.planes, K, &set.warnings, opts);
    return set;
}

}  // namespace roomlayout

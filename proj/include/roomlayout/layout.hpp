#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "roomlayout/candidates.hpp"
#include "roomlayout/raster.hpp"
#include "roomlayout/solver.hpp"

namespace roomlayout {

// Structured layout: polygons share corner and edge objects through their
// plane provenance (a corner is its plane triple, an edge its corner pair).
struct Layout {
    struct Corner {
        int id = -1;
        std::array<int, 3> planes{};
        Vec3 point;
    };
    struct Edge {
        int id = -1;
        std::array<int, 2> corners{};
        std::array<int, 2> planes{};
    };
    struct Polygon {
        int id = -1;
        int plane = -1;
        std::vector<int> corner_loop;
    };

    std::vector<PlaneEq> planes;
    std::vector<Corner> corners;
    std::vector<Edge> edges;
    std::vector<Polygon> polygons;
    nlohmann::json trace;  // solver/refinement provenance

    const PlaneEq& plane_by_id(int id) const {
        for (const PlaneEq& p : planes)
            if (p.id == id) return p;
        throw std::logic_error("Layout: unknown plane id " + std::to_string(id));
    }
    const Corner& corner(int id) const { return corners.at(static_cast<size_t>(id)); }
};

// Assemble the shared-topology graph from the chosen candidate polygons.
// Corners are deduplicated by plane-triple identity, edges by corner-pair
// identity; an edge used by two polygons is listed once.
inline Layout build_layout(const Solution& solution, const CandidateSet& set) {
    Layout layout;

    std::map<std::array<int, 3>, int> corner_ids;   // sorted triple -> layout corner id
    std::map<std::array<int, 2>, int> edge_ids;     // sorted layout corner pair -> edge id
    std::map<int, int> candidate_corner_to_layout;  // candidate corner id -> layout id
    std::vector<int> used_planes;

    auto intern_corner = [&](int candidate_id) {
        auto found = candidate_corner_to_layout.find(candidate_id);
        if (found != candidate_corner_to_layout.end()) return found->second;
        const CornerCandidate& c = set.corner(candidate_id);
        std::array<int, 3> key = c.planes;
        std::sort(key.begin(), key.end());
        auto it = corner_ids.find(key);
        if (it != corner_ids.end()) {
            const Layout::Corner& existing = layout.corners[static_cast<size_t>(it->second)];
            if (norm(existing.point - c.point) > 1e-6)
                throw std::logic_error("build_layout: same plane triple, different points");
            candidate_corner_to_layout[candidate_id] = it->second;
            return it->second;
        }
        Layout::Corner corner;
        corner.id = static_cast<int>(layout.corners.size());
        corner.planes = key;
        corner.point = c.point;
        layout.corners.push_back(corner);
        corner_ids[key] = corner.id;
        candidate_corner_to_layout[candidate_id] = corner.id;
        for (int pid : key) used_planes.push_back(pid);
        return corner.id;
    };

    for (int poly_id : solution.polygon_ids) {
        const PolygonCandidate& poly = set.polygons.at(static_cast<size_t>(poly_id));
        Layout::Polygon out;
        out.id = static_cast<int>(layout.polygons.size());
        out.plane = poly.plane;
        used_planes.push_back(poly.plane);
        for (int cid : poly.loop) out.corner_loop.push_back(intern_corner(cid));

        const size_t n = out.corner_loop.size();
        for (size_t i = 0; i < n; ++i) {
            std::array<int, 2> pair = {out.corner_loop[i], out.corner_loop[(i + 1) % n]};
            std::sort(pair.begin(), pair.end());
            if (edge_ids.count(pair)) continue;
            const EdgeCandidate& e = set.edge(poly.edges[i]);
            Layout::Edge edge;
            edge.id = static_cast<int>(layout.edges.size());
            edge.corners = pair;
            edge.planes = e.shared_planes;
            layout.edges.push_back(edge);
            edge_ids[pair] = edge.id;
        }
        layout.polygons.push_back(std::move(out));
    }

    std::sort(used_planes.begin(), used_planes.end());
    used_planes.erase(std::unique(used_planes.begin(), used_planes.end()), used_planes.end());
    for (int pid : used_planes) layout.planes.push_back(set.plane_by_id(pid));

    return layout;
}

inline nlohmann::json layout_to_json(const Layout& layout) {
    nlohmann::json j;
    j["planes"] = nlohmann::json::array();
    for (const PlaneEq& p : layout.planes) {
        j["planes"].push_back({{"id", p.id},
                               {"normal", {p.normal.x, p.normal.y, p.normal.z}},
                               {"offset", p.offset},
                               {"label", to_string(p.label)}});
    }
    j["corners"] = nlohmann::json::array();
    for (const Layout::Corner& c : layout.corners) {
        j["corners"].push_back({{"id", c.id},
                                {"planes", {c.planes[0], c.planes[1], c.planes[2]}},
                                {"point", {c.point.x, c.point.y, c.point.z}}});
    }
    j["edges"] = nlohmann::json::array();
    for (const Layout::Edge& e : layout.edges) {
        j["edges"].push_back({{"id", e.id},
                              {"corners", {e.corners[0], e.corners[1]}},
                              {"planes", {e.planes[0], e.planes[1]}}});
    }
    j["polygons"] = nlohmann::json::array();
    for (const Layout::Polygon& p : layout.polygons) {
        j["polygons"].push_back({{"id", p.id}, {"plane", p.plane}, {"corner_loop", p.corner_loop}});
    }
    j["trace"] = layout.trace.is_null() ? nlohmann::json::object() : layout.trace;
    return j;
}

inline Layout layout_from_json(const nlohmann::json& j) {
    Layout layout;
    for (const auto& p : j.at("planes")) {
        PlaneEq plane;
        plane.id = p.at("id").get<int>();
        const auto& n = p.at("normal");
        plane.normal = {n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>()};
        plane.offset = p.at("offset").get<double>();
        auto label = plane_label_from_string(p.at("label").get<std::string>());
        if (!label) throw std::invalid_argument("layout: unknown plane label");
        plane.label = *label;
        layout.planes.push_back(plane);
    }
    for (const auto& c : j.at("corners")) {
        Layout::Corner corner;
        corner.id = c.at("id").get<int>();
        for (int i = 0; i < 3; ++i) corner.planes[static_cast<size_t>(i)] = c.at("planes").at(static_cast<size_t>(i)).get<int>();
        const auto& pt = c.at("point");
        corner.point = {pt.at(0).get<double>(), pt.at(1).get<double>(), pt.at(2).get<double>()};
        layout.corners.push_back(corner);
    }
    for (const auto& e : j.at("edges")) {
        Layout::Edge edge;
        edge.id = e.at("id").get<int>();
        edge.corners = {e.at("corners").at(0).get<int>(), e.at("corners").at(1).get<int>()};
        edge.planes = {e.at("planes").at(0).get<int>(), e.at("planes").at(1).get<int>()};
        layout.edges.push_back(edge);
    }
    for (const auto& p : j.at("polygons")) {
        Layout::Polygon poly;
        poly.id = p.at("id").get<int>();
        poly.plane = p.at("plane").get<int>();
        poly.corner_loop = p.at("corner_loop").get<std::vector<int>>();
        layout.polygons.push_back(poly);
    }
    if (j.contains("trace")) layout.trace = j.at("trace");
    return layout;
}

inline std::string export_layout_json(const Layout& layout) {
    return layout_to_json(layout).dump(2) + "\n";
}

// A polygon projected to pixel coordinates, the unit the 2D metrics work on.
struct Poly2D {
    int id = -1;
    std::vector<Vec2> loop;
};

inline std::vector<Poly2D> layout_to_poly2d(const Layout& layout, const CameraIntrinsics& K) {
    std::vector<Poly2D> out;
    for (const Layout::Polygon& poly : layout.polygons) {
        Poly2D p;
        p.id = poly.id;
        for (int cid : poly.corner_loop) {
            const auto px = project_point(K, layout.corner(cid).point);
            if (!px) throw std::invalid_argument("layout_to_poly2d: corner behind the camera");
            p.loop.push_back({px->u, px->v});
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline std::vector<RenderPoly> layout_to_render_polys(const Layout& layout,
                                                      const CameraIntrinsics& K) {
    std::vector<RenderPoly> out;
    const auto polys2d = layout_to_poly2d(layout, K);
    for (size_t i = 0; i < layout.polygons.size(); ++i) {
        const PlaneEq& plane = layout.plane_by_id(layout.polygons[i].plane);
        out.push_back({layout.polygons[i].id, plane.normal, plane.offset, polys2d[i].loop});
    }
    return out;
}

namespace detail {

// Ear clipping of a simple polygon in its plane chart.
inline std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2>& loop) {
    const size_t n = loop.size();
    if (n < 3) throw std::invalid_argument("ear_clip: fewer than 3 vertices");
    std::vector<int> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
    if (polygon_signed_area(loop) < 0.0) std::reverse(idx.begin(), idx.end());

    auto at = [&](const std::vector<int>& ids, size_t i) { return loop[static_cast<size_t>(ids[i])]; };
    std::vector<std::array<int, 3>> tris;
    std::vector<int> ids = idx;
    size_t guard = 0;
    while (ids.size() > 3 && guard++ < n * n + 16) {
        bool clipped = false;
        const size_t m = ids.size();
        for (size_t i = 0; i < m; ++i) {
            const size_t prev = (i + m - 1) % m;
            const size_t next = (i + 1) % m;
            const Vec2 a = at(ids, prev), b = at(ids, i), c = at(ids, next);
            if (cross(b - a, c - b) <= 1e-12) continue;  // reflex or collinear
            bool contains_other = false;
            for (size_t k = 0; k < m && !contains_other; ++k) {
                if (k == prev || k == i || k == next) continue;
                const Vec2 p = at(ids, k);
                const double d0 = cross(b - a, p - a);
                const double d1 = cross(c - b, p - b);
                const double d2 = cross(a - c, p - c);
                if (d0 >= -1e-12 && d1 >= -1e-12 && d2 >= -1e-12) contains_other = true;
            }
            if (contains_other) continue;
            tris.push_back({ids[prev], ids[i], ids[next]});
            ids.erase(ids.begin() + static_cast<long>(i));
            clipped = true;
            break;
        }
        if (!clipped) throw std::invalid_argument("ear_clip: polygon is not simple");
    }
    if (ids.size() == 3) tris.push_back({ids[0], ids[1], ids[2]});
    return tris;
}

}  // namespace detail

// Wavefront OBJ with one group per polygon; each polygon is ear-clipped in
// its plane chart, so the triangle count per polygon is loop length - 2.
inline std::string export_layout_obj(const Layout& layout) {
    std::ostringstream os;
    os.precision(17);
    os << "# roomlayout structured layout\n";
    for (const Layout::Corner& c : layout.corners)
        os << "v " << c.point.x << " " << c.point.y << " " << c.point.z << "\n";
    for (const Layout::Polygon& poly : layout.polygons) {
        const PlaneEq& plane = layout.plane_by_id(poly.plane);
        const PlaneChart chart(plane);
        std::vector<Vec2> loop;
        loop.reserve(poly.corner_loop.size());
        for (int cid : poly.corner_loop) loop.push_back(chart.to_2d(layout.corner(cid).point));
        const auto tris = detail::ear_clip(loop);
        os << "g polygon_" << poly.id << "\n";
        for (const auto& t : tris) {
            os << "f";
            for (int k : t) os << " " << poly.corner_loop[static_cast<size_t>(k)] + 1;
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace roomlayout

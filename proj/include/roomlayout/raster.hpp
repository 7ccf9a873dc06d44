#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "roomlayout/camera.hpp"
#include "roomlayout/candidates.hpp"
#include "roomlayout/image.hpp"

namespace roomlayout {

// A polygon ready for rasterization: its supporting plane plus the projected
// loop in continuous image coordinates. Both candidate polygons and layout
// polygons convert to this.
struct RenderPoly {
    int id = -1;
    Vec3 normal;
    double offset = 0.0;
    std::vector<Vec2> loop;
};

namespace detail {

// Scanline crossings of the loop with the horizontal line y = py, using the
// half-open rule (ymin <= py < ymax). Sorted ascending.
inline void scanline_crossings(const std::vector<Vec2>& loop, double py,
                               std::vector<double>& xs) {
    xs.clear();
    const size_t n = loop.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = loop[i];
        const Vec2& b = loop[(i + 1) % n];
        if (a.y == b.y) continue;
        const double ymin = std::fmin(a.y, b.y);
        const double ymax = std::fmax(a.y, b.y);
        if (!(py >= ymin && py < ymax)) continue;
        xs.push_back(a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
}

// Pixel-center column range [first, last] covered by the half-open span
// [x0, x1); empty when first > last.
inline std::pair<int, int> span_columns(double x0, double x1, int width) {
    // center i+0.5 >= x0  =>  i >= x0 - 0.5 ; center i+0.5 < x1  =>  i < x1 - 0.5
    int first = static_cast<int>(std::ceil(x0 - 0.5));
    const double upper = x1 - 0.5;
    int last = static_cast<int>(std::ceil(upper)) - 1;
    first = std::max(first, 0);
    last = std::min(last, width - 1);
    return {first, last};
}

}  // namespace detail

// Pixel-center-inside rasterization with the top-left fill rule: a center
// exactly on an edge belongs to the polygon for which that edge is a left or
// top boundary, so abutting polygons tile without double coverage.
inline BitMask rasterize_loop(const std::vector<Vec2>& loop, int width, int height) {
    BitMask mask(width, height);
    if (loop.size() < 3) return mask;
    double ymin = loop[0].y, ymax = loop[0].y;
    for (const Vec2& p : loop) {
        ymin = std::fmin(ymin, p.y);
        ymax = std::fmax(ymax, p.y);
    }
    const int row0 = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
    const int row1 = std::min(height - 1, static_cast<int>(std::ceil(ymax)));
    std::vector<double> xs;
    for (int j = row0; j <= row1; ++j) {
        detail::scanline_crossings(loop, j + 0.5, xs);
        for (size_t k = 0; k + 1 < xs.size(); k += 2) {
            const auto [first, last] = detail::span_columns(xs[k], xs[k + 1], width);
            for (int i = first; i <= last; ++i) mask.set(i, j);
        }
    }
    return mask;
}

inline BitMask rasterize_polygon(const PolygonCandidate& poly, const CandidateSet& set,
                                 const CameraIntrinsics& K) {
    return rasterize_loop(set.loop_pixels(poly), K.width, K.height);
}

// z-depth of the ray through continuous image location (u,v) against the
// plane n.X = d. Not finite-checked; callers test |n.ray| themselves.
inline double plane_ray_depth(const Vec3& normal, double offset, const CameraIntrinsics& K,
                              double u, double v) {
    return offset / dot(normal, K.ray(u, v));
}

inline constexpr double kGrazingRayEps = 1e-8;

// Per-pixel depth of each polygon's plane along the pixel ray, z-buffered
// (nearest wins, ties to the smaller polygon id). Pixels whose ray is
// near-parallel to the covering plane stay invalid.
inline std::pair<DepthMap, LabelMap> render_layout_depth(const std::vector<RenderPoly>& polys,
                                                         const CameraIntrinsics& K) {
    DepthMap depth(K.width, K.height, 0.0f);
    LabelMap labels(K.width, K.height, kBackground);

    std::vector<const RenderPoly*> order;
    order.reserve(polys.size());
    for (const RenderPoly& p : polys) order.push_back(&p);
    std::sort(order.begin(), order.end(),
              [](const RenderPoly* a, const RenderPoly* b) { return a->id < b->id; });

    std::vector<double> xs;
    for (const RenderPoly* poly : order) {
        if (poly->loop.size() < 3) continue;
        double ymin = poly->loop[0].y, ymax = poly->loop[0].y;
        for (const Vec2& p : poly->loop) {
            ymin = std::fmin(ymin, p.y);
            ymax = std::fmax(ymax, p.y);
        }
        const int row0 = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
        const int row1 = std::min(K.height - 1, static_cast<int>(std::ceil(ymax)));
        for (int j = row0; j <= row1; ++j) {
            const double v = j + 0.5;
            detail::scanline_crossings(poly->loop, v, xs);
            for (size_t k = 0; k + 1 < xs.size(); k += 2) {
                const auto [first, last] = detail::span_columns(xs[k], xs[k + 1], K.width);
                for (int i = first; i <= last; ++i) {
                    const double u = i + 0.5;
                    const double denom = dot(poly->normal, K.ray(u, v));
                    if (std::fabs(denom) < kGrazingRayEps) continue;
                    const double z = poly->offset / denom;
                    if (!(z > 0.0) || !std::isfinite(z)) continue;
                    const float zf = static_cast<float>(z);
                    if (labels.at(i, j) == kBackground || zf < depth.at(i, j)) {
                        depth.at(i, j) = zf;
                        labels.at(i, j) = poly->id;
                    }
                }
            }
        }
    }
    return {std::move(depth), std::move(labels)};
}

struct PartitionTolerances {
    double min_coverage = 0.995;
    double max_overlap = 0.005;
};

struct PartitionReport {
    bool is_partition = false;
    double coverage_fraction = 0.0;
    double overlap_fraction = 0.0;
};

inline PartitionReport partition_check(const std::vector<const BitMask*>& masks, int width,
                                       int height, const PartitionTolerances& tol = {}) {
    BitMask covered(width, height);
    BitMask dup(width, height);
    for (const BitMask* m : masks) {
        for (size_t i = 0; i < covered.words().size(); ++i) {
            dup.words()[i] |= covered.words()[i] & m->words()[i];
            covered.words()[i] |= m->words()[i];
        }
    }
    PartitionReport rep;
    const double total = static_cast<double>(width) * height;
    rep.coverage_fraction = static_cast<double>(covered.count()) / total;
    rep.overlap_fraction = static_cast<double>(dup.count()) / total;
    rep.is_partition = rep.coverage_fraction >= tol.min_coverage &&
                       rep.overlap_fraction <= tol.max_overlap;
    return rep;
}

inline PartitionReport partition_check(const std::vector<BitMask>& masks, int width, int height,
                                       const PartitionTolerances& tol = {}) {
    std::vector<const BitMask*> ptrs;
    ptrs.reserve(masks.size());
    for (const BitMask& m : masks) ptrs.push_back(&m);
    return partition_check(ptrs, width, height, tol);
}

}  // namespace roomlayout

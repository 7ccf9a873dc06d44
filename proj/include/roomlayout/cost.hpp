#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "roomlayout/image.hpp"
#include "roomlayout/raster.hpp"

namespace roomlayout {

// The planar regions S(I): one mask per plane hypothesis, plus the cached union.
struct SegmentationRegions {
    struct Region {
        int plane_id = -1;
        BitMask mask;
    };

    std::vector<Region> regions;
    BitMask union_mask;

    void build_union(int width, int height) {
        union_mask = BitMask(width, height);
        for (const Region& r : regions) {
            if (!r.mask.pixel_count()) continue;
            if (r.mask.width() != width || r.mask.height() != height)
                throw std::invalid_argument("SegmentationRegions: mask size mismatch");
            union_mask |= r.mask;
        }
    }

    const BitMask* find(int plane_id) const {
        for (const Region& r : regions)
            if (r.plane_id == plane_id) return &r.mask;
        return nullptr;
    }
};

struct PolygonCostTerms {
    int polygon_id = -1;
    double k3d = 0.0;  // meters, image-normalized
    double k2d = 0.0;  // in [0, 2]
};

// Depth-hinge term: (1/|I|) * sum over the footprint of max(D - D', 0).
// Pixels with invalid input or layout depth contribute 0; the normalizer
// stays the full image size.
inline double k3d_term(const BitMask& footprint, const DepthMap& measured,
                       const DepthMap& layout_depth) {
    double acc = 0.0;
    footprint.for_each_set([&](int x, int y) {
        const float d = measured.at(x, y);
        const float dp = layout_depth.at(x, y);
        if (!depth_valid(d) || !depth_valid(dp)) return;
        const double diff = static_cast<double>(d) - static_cast<double>(dp);
        if (diff > 0.0) acc += diff;
    });
    return acc / (static_cast<double>(measured.width) * measured.height);
}

// Same hinge computed directly from the polygon's plane along pixel rays,
// sharing the per-pixel depth formula with the renderer.
inline double k3d_term_plane(const BitMask& footprint, const DepthMap& measured,
                             const Vec3& normal, double offset, const CameraIntrinsics& K) {
    double acc = 0.0;
    footprint.for_each_set([&](int x, int y) {
        const float d = measured.at(x, y);
        if (!depth_valid(d)) return;
        const double denom = dot(normal, K.ray(x + 0.5, y + 0.5));
        if (std::fabs(denom) < kGrazingRayEps) return;
        const double z = offset / denom;
        if (!(z > 0.0) || !std::isfinite(z)) return;
        const double diff = static_cast<double>(d) - static_cast<double>(static_cast<float>(z));
        if (diff > 0.0) acc += diff;
    });
    return acc / (static_cast<double>(measured.width) * measured.height);
}

// Segmentation term of the polygon: (1 - IoU with its own region) + IoU with
// the other regions. A plane with no detected region (refinement-added,
// fallback) takes IoU = 0 for the first term and the full union for the second.
inline double k2d_term(const BitMask& footprint, const SegmentationRegions& segmentation,
                       int plane_id) {
    const BitMask* own = segmentation.find(plane_id);
    double iou_own = 0.0;
    if (own) iou_own = mask_iou(footprint, *own);

    double iou_rest;
    if (own) {
        BitMask rest = segmentation.union_mask;
        rest.subtract(*own);
        iou_rest = mask_iou(footprint, rest);
    } else {
        iou_rest = mask_iou(footprint, segmentation.union_mask);
    }
    return (1.0 - iou_own) + iou_rest;
}

// K(X, I) = sum k3d + lambda * sum k2d over the chosen polygons, folded in
// ascending polygon id. Missing terms are a programming error.
inline double total_cost(const std::vector<PolygonCostTerms>& terms,
                         std::vector<int> chosen_ids, double lambda = 1.0) {
    std::sort(chosen_ids.begin(), chosen_ids.end());
    std::map<int, const PolygonCostTerms*> by_id;
    for (const PolygonCostTerms& t : terms) by_id[t.polygon_id] = &t;

    double sum3d = 0.0;
    double sum2d = 0.0;
    for (int id : chosen_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw std::logic_error("total_cost: no precomputed terms for polygon " +
                                   std::to_string(id));
        sum3d += it->second->k3d;
        sum2d += it->second->k2d;
    }
    return sum3d + lambda * sum2d;
}

// Per-candidate footprint masks and cost terms, indexed like set.polygons.
struct PrecomputedCosts {
    std::vector<BitMask> masks;
    std::vector<PolygonCostTerms> terms;
};

inline PrecomputedCosts precompute_costs(CandidateSet& set, const CameraIntrinsics& K,
                                         const DepthMap& measured,
                                         const SegmentationRegions& segmentation) {
    PrecomputedCosts out;
    out.masks.reserve(set.polygons.size());
    out.terms.reserve(set.polygons.size());
    for (PolygonCandidate& poly : set.polygons) {
        BitMask mask = rasterize_polygon(poly, set, K);
        poly.area_px = static_cast<double>(mask.count());
        const PlaneEq& plane = set.plane_by_id(poly.plane);
        PolygonCostTerms t;
        t.polygon_id = poly.id;
        t.k3d = k3d_term_plane(mask, measured, plane.normal, plane.offset, K);
        t.k2d = k2d_term(mask, segmentation, poly.plane);
        out.masks.push_back(std::move(mask));
        out.terms.push_back(t);
    }
    return out;
}

}  // namespace roomlayout

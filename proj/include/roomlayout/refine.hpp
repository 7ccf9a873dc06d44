#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "roomlayout/candidates.hpp"
#include "roomlayout/cost.hpp"
#include "roomlayout/raster.hpp"
#include "roomlayout/solver.hpp"

namespace roomlayout {

// Hole filling stand-in for the depth-completion step: iterative 5x5
// min-depth dilation of valid neighbors, then a nearest-valid sweep for
// anything left. Valid pixels are never changed.
inline DepthMap fill_depth_holes(const DepthMap& depth, bool* all_invalid_warning = nullptr) {
    DepthMap out = depth;
    if (all_invalid_warning) *all_invalid_warning = false;

    size_t invalid = 0;
    bool any_valid = false;
    for (float v : out.data) {
        if (depth_valid(v))
            any_valid = true;
        else
            ++invalid;
    }
    if (invalid == 0) return out;
    if (!any_valid) {
        if (all_invalid_warning) *all_invalid_warning = true;
        return out;
    }

    const int max_passes = 2 + std::max(out.width, out.height) / 2;
    DepthMap next = out;
    for (int pass = 0; pass < max_passes && invalid > 0; ++pass) {
        size_t filled = 0;
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) {
                if (depth_valid(out.at(x, y))) continue;
                float best = std::numeric_limits<float>::infinity();
                for (int dy = -2; dy <= 2; ++dy) {
                    for (int dx = -2; dx <= 2; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (!out.in_bounds(nx, ny)) continue;
                        const float v = out.at(nx, ny);
                        if (depth_valid(v) && v < best) best = v;
                    }
                }
                if (std::isfinite(best)) {
                    next.at(x, y) = best;
                    ++filled;
                }
            }
        }
        out = next;
        invalid -= filled;
        if (filled == 0) break;
    }

    if (invalid > 0) {
        // Nearest-valid fallback, row-major scan both ways.
        for (int y = 0; y < out.height; ++y) {
            float last = 0.0f;
            for (int x = 0; x < out.width; ++x) {
                if (depth_valid(out.at(x, y)))
                    last = out.at(x, y);
                else if (depth_valid(last))
                    out.at(x, y) = last;
            }
            last = 0.0f;
            for (int x = out.width - 1; x >= 0; --x) {
                if (depth_valid(out.at(x, y)))
                    last = out.at(x, y);
                else if (depth_valid(last))
                    out.at(x, y) = last;
            }
        }
        for (int x = 0; x < out.width; ++x) {
            float last = 0.0f;
            for (int y = 0; y < out.height; ++y) {
                if (depth_valid(out.at(x, y)))
                    last = out.at(x, y);
                else if (depth_valid(last))
                    out.at(x, y) = last;
            }
        }
    }
    return out;
}

// Per-pixel positive part of (input depth - rendered layout depth), with the
// stopping statistic taken over the layout-segmented pixels.
struct DiscrepancyMap {
    Image<float> values;
    double mean_layout = 0.0;  // over segmentation-union pixels with valid input depth
};

inline DiscrepancyMap compute_discrepancy(const DepthMap& measured, const DepthMap& rendered,
                                          const BitMask& stat_mask) {
    DiscrepancyMap out;
    out.values = Image<float>(measured.width, measured.height, 0.0f);
    double acc = 0.0;
    size_t count = 0;
    for (int y = 0; y < measured.height; ++y) {
        for (int x = 0; x < measured.width; ++x) {
            const float d = measured.at(x, y);
            if (!depth_valid(d)) continue;
            const float dp = rendered.at(x, y);
            float disc = 0.0f;
            if (depth_valid(dp) && d > dp) disc = d - dp;
            out.values.at(x, y) = disc;
            if (stat_mask.get(x, y)) {
                acc += disc;
                ++count;
            }
        }
    }
    out.mean_layout = count ? acc / static_cast<double>(count) : 0.0;
    return out;
}

struct RansacConfig {
    int iterations = 500;
    double inlier_threshold_px = 2.0;
    double min_inlier_fraction = 0.3;
    uint64_t seed = 0;
};

struct RefineConfig {
    double disc_threshold = 0.05;     // meters; per-pixel trigger level
    double affected_fraction = 0.02;  // of a polygon's footprint
    int max_iterations = 5;
    double improvement_eps = 1e-3;    // meters
    double gradient_percentile = 0.90;
    double gradient_max_fraction = 0.25;  // relative floor on candidate gradients
    double floor_camera_height = 1.5;  // meters above the fallback floor
};

namespace detail {

// Least-squares 2D line through the points: (point, unit direction).
inline std::pair<Vec2, Vec2> tls_line(const std::vector<Vec2>& pts) {
    Vec2 c{0, 0};
    for (const Vec2& p : pts) c = c + p;
    c = c / static_cast<double>(pts.size());
    double xx = 0, xy = 0, yy = 0;
    for (const Vec2& p : pts) {
        const Vec2 d = p - c;
        xx += d.x * d.x;
        xy += d.x * d.y;
        yy += d.y * d.y;
    }
    // Principal direction of the 2x2 covariance.
    const double tr = xx + yy;
    const double det = xx * yy - xy * xy;
    const double lam = 0.5 * tr + std::sqrt(std::fmax(0.0, 0.25 * tr * tr - det));
    Vec2 dir{xy, lam - xx};
    if (norm(dir) < 1e-12) dir = (xx >= yy) ? Vec2{1, 0} : Vec2{0, 1};
    dir = dir / norm(dir);
    return {c, dir};
}

}  // namespace detail

// Missing-plane hypothesis for a flagged polygon: RANSAC-fit a 2D line to the
// footprint pixels with the largest discrepancy gradients, then return the
// plane through that line's rays and the camera center (offset exactly 0),
// oriented away from the high-discrepancy side. Absent when the line support
// is too weak.
inline std::optional<PlaneEq> detect_missing_plane(const BitMask& footprint,
                                                   const DiscrepancyMap& disc,
                                                   const CameraIntrinsics& K,
                                                   const RansacConfig& rc,
                                                   double gradient_percentile = 0.90,
                                                   int plane_id = -1,
                                                   double min_gradient = 0.0,
                                                   double max_fraction = 0.25) {
    const Image<float>& d = disc.values;
    std::vector<Vec2> pixels;
    std::vector<double> mags;
    footprint.for_each_set([&](int x, int y) {
        const int xm = std::max(0, x - 1), xp = std::min(d.width - 1, x + 1);
        const int ym = std::max(0, y - 1), yp = std::min(d.height - 1, y + 1);
        const double gx = (d.at(xp, y) - d.at(xm, y)) / static_cast<double>(xp - xm);
        const double gy = (d.at(x, yp) - d.at(x, ym)) / static_cast<double>(yp - ym);
        const double mag = std::sqrt(gx * gx + gy * gy);
        if (mag > 0.0) {
            pixels.push_back({x + 0.5, y + 0.5});
            mags.push_back(mag);
        }
    });
    if (pixels.size() < 2) return std::nullopt;

    std::vector<double> sorted = mags;
    std::sort(sorted.begin(), sorted.end());
    const size_t idx = static_cast<size_t>(gradient_percentile * (sorted.size() - 1));
    // Two floors on top of the percentile. Depth noise makes every gradient
    // nonzero, so the absolute floor keeps candidates at the trigger scale;
    // a wrong layout also produces smooth slopes over large areas, so the
    // relative floor keeps only step-like changes, which an occlusion
    // boundary by nature is.
    const double threshold =
        std::fmax(std::fmax(sorted[idx], min_gradient), max_fraction * sorted.back());

    std::vector<Vec2> points;
    for (size_t i = 0; i < pixels.size(); ++i)
        if (mags[i] >= threshold) points.push_back(pixels[i]);
    if (points.size() < 2) return std::nullopt;

    std::mt19937_64 rng(rc.seed);
    std::uniform_int_distribution<size_t> pick(0, points.size() - 1);
    size_t best_count = 0;
    std::vector<char> best_inliers;
    for (int it = 0; it < rc.iterations; ++it) {
        const size_t a = pick(rng);
        const size_t b = pick(rng);
        if (a == b) continue;
        const Vec2 p0 = points[a];
        Vec2 dir = points[b] - p0;
        const double len = norm(dir);
        if (len < 1e-9) continue;
        dir = dir / len;
        const Vec2 nrm{-dir.y, dir.x};
        std::vector<char> inliers(points.size(), 0);
        size_t count = 0;
        for (size_t i = 0; i < points.size(); ++i) {
            if (std::fabs(dot(points[i] - p0, nrm)) <= rc.inlier_threshold_px) {
                inliers[i] = 1;
                ++count;
            }
        }
        if (count > best_count) {
            best_count = count;
            best_inliers = std::move(inliers);
        }
    }
    if (best_count < 2 ||
        static_cast<double>(best_count) / points.size() < rc.min_inlier_fraction)
        return std::nullopt;

    std::vector<Vec2> support;
    for (size_t i = 0; i < points.size(); ++i)
        if (best_inliers[i]) support.push_back(points[i]);
    const auto [line_point, line_dir] = detail::tls_line(support);

    const Vec2 q0 = line_point - line_dir * 100.0;
    const Vec2 q1 = line_point + line_dir * 100.0;
    const Vec3 r0 = K.ray(q0.x, q0.y);
    const Vec3 r1 = K.ray(q1.x, q1.y);
    Vec3 n = normalized(cross(r0, r1));
    if (norm(n) < 0.5) return std::nullopt;

    // High-discrepancy side carved to the negative side of the plane.
    Vec3 high{0, 0, 0};
    double weight = 0.0;
    for (size_t i = 0; i < pixels.size(); ++i) {
        const float v = d.at(static_cast<int>(pixels[i].x), static_cast<int>(pixels[i].y));
        if (v > 0.0f) {
            high += K.ray(pixels[i].x, pixels[i].y) * static_cast<double>(v);
            weight += v;
        }
    }
    if (weight > 0.0 && dot(n, high / weight) > 0.0) n = -n;

    return PlaneEq{n, 0.0, PlaneLabel::wall, plane_id};
}

// Fallback floor when no floor plane was detected: normal from the average
// cross product of the wall normals with [0,0,1], camera assumed at
// camera_height above the floor. Each cross product is flipped into the
// upward hemisphere (y <= 0) before averaging; opposing wall pairs would
// otherwise cancel exactly. Absent when the construction is degenerate
// (no vertical component).
inline std::optional<PlaneEq> floor_fallback(const std::vector<PlaneEq>& walls,
                                             double camera_height = 1.5, int plane_id = -1) {
    Vec3 acc{0, 0, 0};
    int count = 0;
    for (const PlaneEq& w : walls) {
        if (w.label != PlaneLabel::wall) continue;
        Vec3 c = cross(w.normal, Vec3{0, 0, 1});
        if (c.y > 0.0) c = -c;
        acc += c;
        ++count;
    }
    if (count == 0) return std::nullopt;
    acc = acc / static_cast<double>(count);
    if (norm(acc) < 1e-9) return std::nullopt;
    Vec3 n = normalized(acc);
    if (n.y > 0.0) n = -n;          // floor is below the camera (y points down)
    if (std::fabs(n.y) < 1e-9) return std::nullopt;
    // Camera on the positive side at the given height: n.0 - d = -d > 0.
    return PlaneEq{n, -camera_height, PlaneLabel::floor, plane_id};
}

// One generate-candidates / precompute / solve round over the given layout
// planes (frustum planes appended internally).
struct SceneContext {
    CameraIntrinsics K;
    DepthMap depth;  // hole-filled
    SegmentationRegions segmentation;
};

struct SolveOutcome {
    CandidateSet set;
    PrecomputedCosts costs;
    std::optional<Solution> solution;
};

inline SolveOutcome generate_and_solve(const SceneContext& ctx,
                                       const std::vector<PlaneEq>& layout_planes,
                                       const SolveConfig& scfg,
                                       const CandidateGenOptions& gopts = {}) {
    std::vector<PlaneEq> all = layout_planes;
    for (const PlaneEq& f : frustum_planes(ctx.K)) all.push_back(f);

    SolveOutcome out;
    out.set = generate_candidates(all, ctx.K, gopts);
    out.costs = precompute_costs(out.set, ctx.K, ctx.depth, ctx.segmentation);

    std::vector<SolverCandidate> cands;
    for (size_t i = 0; i < out.set.polygons.size(); ++i) {
        const PolygonCandidate& poly = out.set.polygons[i];
        if (!plausibility_filter(poly, out.set, scfg.plausibility_min_gap,
                                 scfg.plausibility_min_area))
            continue;
        SolverCandidate c;
        c.id = poly.id;
        c.plane_id = poly.plane;
        c.mask = &out.costs.masks[i];
        c.k3d = out.costs.terms[i].k3d;
        c.k2d = out.costs.terms[i].k2d;
        cands.push_back(c);
    }
    out.solution = solve(cands, scfg, ctx.K.width, ctx.K.height);
    return out;
}

inline std::vector<RenderPoly> to_render_polys(const CandidateSet& set,
                                               const std::vector<int>& polygon_ids) {
    std::vector<RenderPoly> out;
    out.reserve(polygon_ids.size());
    for (int id : polygon_ids) {
        const PolygonCandidate& poly = set.polygons.at(static_cast<size_t>(id));
        const PlaneEq& plane = set.plane_by_id(poly.plane);
        out.push_back({poly.id, plane.normal, plane.offset, set.loop_pixels(poly)});
    }
    return out;
}

struct RefineTraceEntry {
    int iteration = 0;
    int flagged_polygon = -1;
    int added_plane_id = -1;
    Vec3 added_normal;
    double added_offset = 0.0;
    double disc_before = 0.0;
    double disc_after = 0.0;
    double cost_after = 0.0;
    bool feasible = true;
};

struct RefineResult {
    SolveOutcome outcome;              // best seen by (discrepancy, then cost)
    double mean_discrepancy = 0.0;     // of the returned outcome
    std::vector<PlaneEq> planes;       // final layout plane set (no frustum)
    std::vector<RefineTraceEntry> trace;
    std::string stop_reason;
    int iterations = 0;
};

namespace detail {

struct DiscAnalysis {
    DiscrepancyMap disc;
    int flagged_polygon = -1;   // worst offender above the trigger, or -1
    BitMask flagged_footprint;
};

inline DiscAnalysis analyze_solution(const SceneContext& ctx, const SolveOutcome& outcome,
                                     const RefineConfig& cfg) {
    DiscAnalysis out;
    const auto polys = to_render_polys(outcome.set, outcome.solution->polygon_ids);
    auto [rendered, labels] = render_layout_depth(polys, ctx.K);
    out.disc = compute_discrepancy(ctx.depth, rendered, ctx.segmentation.union_mask);

    double worst_mean = 0.0;
    for (int id : outcome.solution->polygon_ids) {
        BitMask footprint(ctx.K.width, ctx.K.height);
        size_t total = 0, affected = 0;
        double acc = 0.0;
        for (int y = 0; y < labels.height; ++y) {
            for (int x = 0; x < labels.width; ++x) {
                if (labels.at(x, y) != id) continue;
                footprint.set(x, y);
                ++total;
                const float v = out.disc.values.at(x, y);
                acc += v;
                if (v > cfg.disc_threshold) ++affected;
            }
        }
        if (total == 0) continue;
        if (static_cast<double>(affected) / static_cast<double>(total) <= cfg.affected_fraction)
            continue;
        const double mean = acc / static_cast<double>(total);
        if (out.flagged_polygon < 0 || mean > worst_mean) {
            out.flagged_polygon = id;
            out.flagged_footprint = footprint;
            worst_mean = mean;
        }
    }
    return out;
}

}  // namespace detail

// The render-and-compare loop: while some chosen polygon shows a large depth
// discrepancy, hypothesize the occluding plane from the discrepancy gradient,
// extend the plane set, and re-solve. Stops on convergence, no detection,
// non-improvement, or the iteration cap; returns the best-seen solution.
inline RefineResult refine_loop(const SceneContext& ctx, std::vector<PlaneEq> layout_planes,
                                std::optional<SolveOutcome> initial, const RefineConfig& cfg,
                                const RansacConfig& rc, const SolveConfig& scfg,
                                const CandidateGenOptions& gopts = {}) {
    RefineResult result;

    SolveOutcome current = initial ? std::move(*initial)
                                   : generate_and_solve(ctx, layout_planes, scfg, gopts);

    int next_plane_id = 0;
    for (const PlaneEq& p : layout_planes) next_plane_id = std::max(next_plane_id, p.id + 1);

    if (!current.solution) {
        // Infeasible entry: retry once with the fallback floor if it is missing.
        const bool has_floor = std::any_of(layout_planes.begin(), layout_planes.end(),
                                           [](const PlaneEq& p) { return p.label == PlaneLabel::floor; });
        if (!has_floor) {
            if (auto floor = floor_fallback(layout_planes, cfg.floor_camera_height, next_plane_id)) {
                layout_planes.push_back(*floor);
                ++next_plane_id;
                current = generate_and_solve(ctx, layout_planes, scfg, gopts);
            }
        }
        if (!current.solution) {
            result.planes = layout_planes;
            result.stop_reason = "infeasible";
            result.outcome = std::move(current);
            return result;
        }
    }

    auto analysis = detail::analyze_solution(ctx, current, cfg);
    double current_disc = analysis.disc.mean_layout;

    result.outcome = current;
    result.mean_discrepancy = current_disc;
    double best_disc = current_disc;
    double best_cost = current.solution->cost;

    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        if (analysis.flagged_polygon < 0) {
            result.stop_reason = "converged";
            break;
        }
        auto plane = detect_missing_plane(analysis.flagged_footprint, analysis.disc, ctx.K, rc,
                                          cfg.gradient_percentile, next_plane_id,
                                          cfg.disc_threshold, cfg.gradient_max_fraction);
        if (!plane) {
            result.stop_reason = "no plane detected";
            break;
        }

        RefineTraceEntry entry;
        entry.iteration = iter;
        entry.flagged_polygon = analysis.flagged_polygon;
        entry.added_plane_id = plane->id;
        entry.added_normal = plane->normal;
        entry.added_offset = plane->offset;
        entry.disc_before = current_disc;

        layout_planes.push_back(*plane);
        ++next_plane_id;

        SolveOutcome next = generate_and_solve(ctx, layout_planes, scfg, gopts);
        result.iterations = iter;
        if (!next.solution) {
            entry.feasible = false;
            result.trace.push_back(entry);
            result.stop_reason = "refined set infeasible";
            break;
        }

        auto next_analysis = detail::analyze_solution(ctx, next, cfg);
        entry.disc_after = next_analysis.disc.mean_layout;
        entry.cost_after = next.solution->cost;
        result.trace.push_back(entry);

        const double new_disc = next_analysis.disc.mean_layout;
        if (new_disc < best_disc || (new_disc == best_disc && next.solution->cost < best_cost)) {
            result.outcome = next;
            result.mean_discrepancy = new_disc;
            best_disc = new_disc;
            best_cost = next.solution->cost;
        }
        if (current_disc - new_disc < cfg.improvement_eps) {
            result.stop_reason = "no improvement";
            current = std::move(next);
            break;
        }
        current = std::move(next);
        analysis = std::move(next_analysis);
        current_disc = new_disc;
        if (iter == cfg.max_iterations) result.stop_reason = "max iterations";
    }
    if (result.stop_reason.empty()) result.stop_reason = "converged";

    result.planes = layout_planes;
    return result;
}

}  // namespace roomlayout

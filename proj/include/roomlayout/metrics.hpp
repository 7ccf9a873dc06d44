#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "roomlayout/image.hpp"
#include "roomlayout/layout.hpp"
#include "roomlayout/raster.hpp"

namespace roomlayout {

struct Correspondences {
    struct Pair {
        int gt_id = -1;
        int pred_id = -1;
        double iou = 0.0;
    };
    std::vector<Pair> pairs;
    std::vector<int> unmatched_gt;
    std::vector<int> unmatched_pred;
};

// Greedy one-to-one matching: ground-truth polygons by descending rasterized
// area, each matched to the remaining prediction of highest mask IoU (> 0
// required). Ties on IoU break to the smaller predicted id.
inline Correspondences match_polygons(const std::vector<Poly2D>& gt,
                                      const std::vector<Poly2D>& pred, int width, int height) {
    std::vector<BitMask> gt_masks, pred_masks;
    gt_masks.reserve(gt.size());
    pred_masks.reserve(pred.size());
    for (const Poly2D& p : gt) gt_masks.push_back(rasterize_loop(p.loop, width, height));
    for (const Poly2D& p : pred) pred_masks.push_back(rasterize_loop(p.loop, width, height));

    std::vector<size_t> order(gt.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const size_t ca = gt_masks[a].count(), cb = gt_masks[b].count();
        if (ca != cb) return ca > cb;
        return gt[a].id < gt[b].id;
    });

    Correspondences out;
    std::vector<char> pred_used(pred.size(), 0);
    for (size_t gi : order) {
        int best = -1;
        double best_iou = 0.0;
        for (size_t pi = 0; pi < pred.size(); ++pi) {
            if (pred_used[pi]) continue;
            const double iou = mask_iou(gt_masks[gi], pred_masks[pi]);
            if (iou <= 0.0) continue;
            if (best < 0 || iou > best_iou ||
                (iou == best_iou && pred[pi].id < pred[static_cast<size_t>(best)].id)) {
                best = static_cast<int>(pi);
                best_iou = iou;
            }
        }
        if (best >= 0) {
            pred_used[static_cast<size_t>(best)] = 1;
            out.pairs.push_back({gt[gi].id, pred[static_cast<size_t>(best)].id, best_iou});
        } else {
            out.unmatched_gt.push_back(gt[gi].id);
        }
    }
    for (size_t pi = 0; pi < pred.size(); ++pi)
        if (!pred_used[pi]) out.unmatched_pred.push_back(pred[pi].id);
    std::sort(out.unmatched_gt.begin(), out.unmatched_gt.end());
    std::sort(out.unmatched_pred.begin(), out.unmatched_pred.end());
    return out;
}

// IoU metric: (2 / (M + N)) * sum of matched-pair IoUs.
inline double iou_metric(const Correspondences& c, size_t gt_count, size_t pred_count) {
    if (gt_count + pred_count == 0)
        throw std::invalid_argument("iou_metric: no polygons on either side");
    double acc = 0.0;
    for (const auto& p : c.pairs) acc += p.iou;
    return 2.0 * acc / static_cast<double>(gt_count + pred_count);
}

// Pixel error: fraction of image locations whose ground-truth and predicted
// polygons are not a matched pair. Both-background pixels count as matched;
// a background on exactly one side counts as a mismatch.
inline double pixel_error(const Correspondences& c, const LabelMap& gt_labels,
                          const LabelMap& pred_labels) {
    if (gt_labels.width != pred_labels.width || gt_labels.height != pred_labels.height)
        throw std::invalid_argument("pixel_error: label map size mismatch");
    std::set<std::pair<int, int>> matched;
    for (const auto& p : c.pairs) matched.insert({p.gt_id, p.pred_id});

    size_t wrong = 0;
    for (size_t i = 0; i < gt_labels.size(); ++i) {
        const int32_t g = gt_labels.data[i];
        const int32_t p = pred_labels.data[i];
        if (g == kBackground && p == kBackground) continue;
        if (g == kBackground || p == kBackground || !matched.count({g, p})) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(gt_labels.size());
}

struct EdgeErrorResult {
    double error_px = 0.0;
    bool degenerate = false;  // one side had no boundary; worst case reported
};

namespace detail {

inline std::vector<Vec2> sample_boundaries(const std::vector<Poly2D>& polys, double step) {
    std::vector<Vec2> samples;
    for (const Poly2D& poly : polys) {
        const size_t n = poly.loop.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2 a = poly.loop[i];
            const Vec2 b = poly.loop[(i + 1) % n];
            const double len = norm(b - a);
            samples.push_back(a);
            for (double t = step; t < len; t += step) samples.push_back(a + (b - a) * (t / len));
        }
    }
    return samples;
}

inline double directed_boundary_distance(const std::vector<Vec2>& samples,
                                         const std::vector<Poly2D>& targets) {
    double acc = 0.0;
    for (const Vec2& s : samples) {
        double best = std::numeric_limits<double>::infinity();
        for (const Poly2D& poly : targets) {
            const size_t n = poly.loop.size();
            for (size_t i = 0; i < n; ++i) {
                best = std::fmin(best, point_segment_distance(s, poly.loop[i], poly.loop[(i + 1) % n]));
            }
        }
        acc += best;
    }
    return acc / static_cast<double>(samples.size());
}

}  // namespace detail

// Symmetric Chamfer distance between the polygon boundaries, sampled at 1 px
// steps; the two directed means are averaged.
inline EdgeErrorResult edge_error(const std::vector<Poly2D>& gt, const std::vector<Poly2D>& pred,
                                  int width, int height, double sample_step = 1.0) {
    const auto gt_samples = detail::sample_boundaries(gt, sample_step);
    const auto pred_samples = detail::sample_boundaries(pred, sample_step);
    if (gt_samples.empty() || pred_samples.empty()) {
        const double diag = std::sqrt(static_cast<double>(width) * width +
                                      static_cast<double>(height) * height);
        return {diag, true};
    }
    const double a = detail::directed_boundary_distance(gt_samples, pred);
    const double b = detail::directed_boundary_distance(pred_samples, gt);
    return {0.5 * (a + b), false};
}

namespace detail {

// Lower median: element at index (n-1)/2 of the sorted values.
inline double lower_median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    const size_t mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
    return values[static_cast<size_t>(mid)];
}

}  // namespace detail

struct RmseResult {
    double rmse = 0.0;
    double rmse_uts = 0.0;
    double scale = 1.0;  // s = median(gt) / median(pred)
};

// RMSE between predicted and ground-truth layout depths over pixels valid in
// both and not excluded; rmse_uts rescales the prediction by the median ratio
// first.
inline RmseResult rmse_depth(const DepthMap& pred, const DepthMap& gt,
                             const BitMask* excluded = nullptr) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("rmse_depth: size mismatch");
    std::vector<double> pv, gv;
    for (int y = 0; y < gt.height; ++y) {
        for (int x = 0; x < gt.width; ++x) {
            if (excluded && excluded->get(x, y)) continue;
            const float p = pred.at(x, y);
            const float g = gt.at(x, y);
            if (!depth_valid(p) || !depth_valid(g)) continue;
            pv.push_back(static_cast<double>(p));
            gv.push_back(static_cast<double>(g));
        }
    }
    if (pv.empty()) throw std::invalid_argument("rmse_depth: no pixels to compare");

    RmseResult out;
    double sq = 0.0;
    for (size_t i = 0; i < pv.size(); ++i) {
        const double d = pv[i] - gv[i];
        sq += d * d;
    }
    out.rmse = std::sqrt(sq / static_cast<double>(pv.size()));

    out.scale = detail::lower_median(gv) / detail::lower_median(pv);
    double sq_uts = 0.0;
    for (size_t i = 0; i < pv.size(); ++i) {
        const double d = pv[i] * out.scale - gv[i];
        sq_uts += d * d;
    }
    out.rmse_uts = std::sqrt(sq_uts / static_cast<double>(pv.size()));
    return out;
}

struct MetricsReport {
    double iou = 0.0;
    double pe = 0.0;
    double ee_px = 0.0;
    double rmse_m = 0.0;
    std::optional<double> rmse_uts_m;
    double depth_scale = 1.0;
    bool ee_degenerate = false;
    Correspondences correspondences;
};

inline nlohmann::json metrics_to_json(const MetricsReport& r) {
    nlohmann::json j;
    j["iou"] = r.iou;
    j["pe"] = r.pe;
    j["ee_px"] = r.ee_px;
    j["rmse_m"] = r.rmse_m;
    if (r.rmse_uts_m) {
        j["rmse_uts_m"] = *r.rmse_uts_m;
        j["depth_scale"] = r.depth_scale;
    }
    j["ee_degenerate"] = r.ee_degenerate;
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : r.correspondences.pairs)
        j["pairs"].push_back({{"gt", p.gt_id}, {"pred", p.pred_id}, {"iou", p.iou}});
    j["unmatched_gt"] = r.correspondences.unmatched_gt;
    j["unmatched_pred"] = r.correspondences.unmatched_pred;
    return j;
}

struct EvalOptions {
    bool compute_uts = false;
    std::vector<int> occluded_gt_polygons;  // gt polygon ids excluded from RMSE
};

// The full ScanNet-Layout metric suite for two structured layouts.
inline MetricsReport evaluate_layouts(const Layout& gt, const Layout& pred,
                                      const CameraIntrinsics& K, const EvalOptions& opts = {}) {
    const auto gt2d = layout_to_poly2d(gt, K);
    const auto pred2d = layout_to_poly2d(pred, K);

    MetricsReport report;
    report.correspondences = match_polygons(gt2d, pred2d, K.width, K.height);
    report.iou = iou_metric(report.correspondences, gt2d.size(), pred2d.size());

    auto [gt_depth, gt_labels] = render_layout_depth(layout_to_render_polys(gt, K), K);
    auto [pred_depth, pred_labels] = render_layout_depth(layout_to_render_polys(pred, K), K);
    report.pe = pixel_error(report.correspondences, gt_labels, pred_labels);

    const auto ee = edge_error(gt2d, pred2d, K.width, K.height);
    report.ee_px = ee.error_px;
    report.ee_degenerate = ee.degenerate;

    BitMask excluded(K.width, K.height);
    bool has_excluded = false;
    if (!opts.occluded_gt_polygons.empty()) {
        std::set<int> ids(opts.occluded_gt_polygons.begin(), opts.occluded_gt_polygons.end());
        for (int y = 0; y < gt_labels.height; ++y)
            for (int x = 0; x < gt_labels.width; ++x)
                if (ids.count(gt_labels.at(x, y))) {
                    excluded.set(x, y);
                    has_excluded = true;
                }
    }
    const RmseResult rmse = rmse_depth(pred_depth, gt_depth, has_excluded ? &excluded : nullptr);
    report.rmse_m = rmse.rmse;
    if (opts.compute_uts) {
        report.rmse_uts_m = rmse.rmse_uts;
        report.depth_scale = rmse.scale;
    }
    return report;
}

}  // namespace roomlayout

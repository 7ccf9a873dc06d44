#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "roomlayout/layout.hpp"
#include "roomlayout/plane_fit.hpp"
#include "roomlayout/refine.hpp"
#include "roomlayout/scene_io.hpp"

namespace roomlayout {

struct PipelineConfig {
    SolveConfig solve;
    RefineConfig refine;
    RansacConfig ransac;
    PlaneFitOptions plane_fit;
    CandidateGenOptions candidates;
    bool refit_planes = true;      // refit plane parameters to the depth map
    bool enable_refine = true;
    bool enable_floor_fallback = true;
};

struct PipelineResult {
    std::optional<Layout> layout;
    std::optional<Solution> solution;
    std::vector<PlaneEq> planes;  // final layout plane set
    double mean_discrepancy = 0.0;
    std::vector<RefineTraceEntry> refine_trace;
    std::string stop_reason;
    int refine_iterations = 0;
};

namespace detail {

inline nlohmann::json trace_to_json(const PipelineResult& result,
                                    const PipelineConfig& cfg) {
    nlohmann::json trace;
    trace["stop_reason"] = result.stop_reason;
    trace["refine_iterations"] = result.refine_iterations;
    trace["mean_discrepancy"] = result.mean_discrepancy;
    trace["config"] = {{"lambda", cfg.solve.lambda},
                       {"disc_threshold", cfg.refine.disc_threshold},
                       {"affected_fraction", cfg.refine.affected_fraction},
                       {"improvement_eps", cfg.refine.improvement_eps},
                       {"max_iterations", cfg.refine.max_iterations},
                       {"ransac_seed", cfg.ransac.seed}};
    trace["iterations"] = nlohmann::json::array();
    for (const RefineTraceEntry& e : result.refine_trace) {
        trace["iterations"].push_back(
            {{"iteration", e.iteration},
             {"flagged_polygon", e.flagged_polygon},
             {"added_plane",
              {{"id", e.added_plane_id},
               {"normal", {e.added_normal.x, e.added_normal.y, e.added_normal.z}},
               {"offset", e.added_offset}}},
             {"disc_before", e.disc_before},
             {"disc_after", e.disc_after},
             {"cost_after", e.cost_after},
             {"feasible", e.feasible}});
    }
    // Timing stays out of the file so outputs are byte-reproducible.
    if (result.solution) {
        trace["search"] = {{"cost", result.solution->cost},
                           {"subsets_generated", result.solution->report.subsets_generated},
                           {"subsets_feasible", result.solution->report.subsets_feasible},
                           {"pruning_used", result.solution->report.pruning_used}};
    }
    return trace;
}

}  // namespace detail

// The full reconstruction: refit planes to the depth map, add the fallback
// floor when none was detected, generate candidates, solve, refine.
inline PipelineResult estimate_layout(const SceneInput& scene, const PipelineConfig& cfg = {}) {
    PipelineResult result;
    scene.intrinsics.validate();
    if (!scene.depth) throw std::invalid_argument("estimate_layout: the scene has no depth map");

    SceneContext ctx;
    ctx.K = scene.intrinsics;
    ctx.depth = fill_depth_holes(*scene.depth);
    ctx.segmentation = scene.regions;
    if (!ctx.segmentation.union_mask.pixel_count())
        ctx.segmentation.build_union(ctx.K.width, ctx.K.height);

    std::vector<PlaneEq> planes = scene.planes;
    if (cfg.refit_planes) {
        for (PlaneEq& plane : planes) {
            const BitMask* region = ctx.segmentation.find(plane.id);
            if (!region) continue;
            if (auto fitted = fit_plane_to_region(ctx.K, ctx.depth, *region, plane.label,
                                                  plane.id, cfg.plane_fit))
                plane = *fitted;
        }
    }

    int next_plane_id = 0;
    for (const PlaneEq& p : planes) next_plane_id = std::max(next_plane_id, p.id + 1);
    if (cfg.enable_floor_fallback) {
        const bool has_floor = std::any_of(planes.begin(), planes.end(), [](const PlaneEq& p) {
            return p.label == PlaneLabel::floor;
        });
        if (!has_floor) {
            if (auto floor = floor_fallback(planes, cfg.refine.floor_camera_height, next_plane_id)) {
                planes.push_back(*floor);
                ++next_plane_id;
            }
        }
    }

    SolveOutcome outcome = generate_and_solve(ctx, planes, cfg.solve, cfg.candidates);

    if (cfg.enable_refine) {
        RefineResult refined = refine_loop(ctx, planes, std::move(outcome), cfg.refine,
                                           cfg.ransac, cfg.solve, cfg.candidates);
        result.planes = refined.planes;
        result.refine_trace = refined.trace;
        result.stop_reason = refined.stop_reason;
        result.refine_iterations = refined.iterations;
        result.mean_discrepancy = refined.mean_discrepancy;
        outcome = std::move(refined.outcome);
    } else {
        result.planes = planes;
        result.stop_reason = outcome.solution ? "no refinement" : "infeasible";
        if (outcome.solution) {
            auto analysis = detail::analyze_solution(ctx, outcome, cfg.refine);
            result.mean_discrepancy = analysis.disc.mean_layout;
        }
    }

    if (outcome.solution) {
        result.solution = outcome.solution;
        Layout layout = build_layout(*outcome.solution, outcome.set);
        layout.trace = detail::trace_to_json(result, cfg);
        result.layout = std::move(layout);
    }
    return result;
}

}  // namespace roomlayout

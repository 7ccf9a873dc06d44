#include <catch2/catch.hpp>

#include "roomlayout/metrics.hpp"
#include "roomlayout/pipeline.hpp"
#include "roomlayout/synth.hpp"

using namespace roomlayout;

TEST_CASE("end-to-end recovery of the clean cuboid scene") {
    const SynthResult r = generate_scene({.preset = SynthPreset::cuboid});
    const PipelineResult out = estimate_layout(r.scene);
    REQUIRE(out.layout);
    REQUIRE(out.layout->polygons.size() == r.gt.polygons.size());
    const MetricsReport rep = evaluate_layouts(r.gt, *out.layout, r.scene.intrinsics);
    REQUIRE(rep.iou >= 0.99);
    REQUIRE(rep.pe <= 0.01);
    REQUIRE(rep.rmse_m <= 1e-3);
}

TEST_CASE("pipeline refits planes from the depth map") {
    SynthSpec spec{.preset = SynthPreset::cuboid};
    spec.noise.plane_angle_deg = 3.0;  // badly perturbed hypotheses
    spec.seed = 4;
    const SynthResult r = generate_scene(spec);
    const PipelineResult out = estimate_layout(r.scene);
    REQUIRE(out.layout);
    // Refitting recovers near-exact geometry despite the 3-degree noise.
    const MetricsReport rep = evaluate_layouts(r.gt, *out.layout, r.scene.intrinsics);
    REQUIRE(rep.iou >= 0.97);
    REQUIRE(rep.rmse_m <= 0.01);

    PipelineConfig no_refit;
    no_refit.refit_planes = false;
    const PipelineResult raw = estimate_layout(r.scene, no_refit);
    if (raw.layout) {
        const MetricsReport raw_rep = evaluate_layouts(r.gt, *raw.layout, r.scene.intrinsics);
        REQUIRE(rep.rmse_m <= raw_rep.rmse_m + 1e-12);
    }
}

TEST_CASE("no-floor scene gains a fallback floor polygon") {
    const SynthResult r = generate_scene({.preset = SynthPreset::no_floor});
    const PipelineResult out = estimate_layout(r.scene);
    REQUIRE(out.layout);

    int floor_polygons = 0;
    for (const Layout::Polygon& poly : out.layout->polygons) {
        const PlaneEq& plane = out.layout->plane_by_id(poly.plane);
        if (plane.label != PlaneLabel::floor) continue;
        ++floor_polygons;
        REQUIRE(std::fabs(plane.signed_distance({0, 0, 0})) == Approx(1.5));
    }
    REQUIRE(floor_polygons == 1);
}

TEST_CASE("refinement can be disabled") {
    const SynthResult r = generate_scene({.preset = SynthPreset::occluded_wall});
    PipelineConfig cfg;
    cfg.enable_refine = false;
    const PipelineResult out = estimate_layout(r.scene, cfg);
    REQUIRE(out.refine_iterations == 0);
    REQUIRE(out.refine_trace.empty());
    // The un-refined layout misses the occlusion edge: high discrepancy.
    REQUIRE(out.mean_discrepancy > 0.05);

    const PipelineResult refined = estimate_layout(r.scene);
    REQUIRE(refined.mean_discrepancy < 0.1 * out.mean_discrepancy);
}

TEST_CASE("layout export embeds the refinement trace") {
    const SynthResult r = generate_scene({.preset = SynthPreset::occluded_wall});
    const PipelineResult out = estimate_layout(r.scene);
    REQUIRE(out.layout);
    const nlohmann::json j = layout_to_json(*out.layout);
    REQUIRE(j.contains("trace"));
    REQUIRE(j["trace"]["refine_iterations"].get<int>() == out.refine_iterations);
    REQUIRE(j["trace"]["iterations"].size() == out.refine_trace.size());
    REQUIRE(j["trace"]["iterations"][0]["added_plane"]["offset"].get<double>() == 0.0);
}

TEST_CASE("furniture occluders do not displace the layout") {
    // The depth hinge penalizes layout in front of the measured depth only;
    // objects in front of the layout must leave the true layout optimal.
    SynthSpec spec{.preset = SynthPreset::cuboid};
    spec.noise.furniture = 3;
    spec.seed = 9;
    const SynthResult r = generate_scene(spec);
    const PipelineResult out = estimate_layout(r.scene);
    REQUIRE(out.layout);
    const MetricsReport rep = evaluate_layouts(r.gt, *out.layout, r.scene.intrinsics);
    REQUIRE(rep.iou >= 0.98);
    REQUIRE(rep.rmse_m <= 1e-2);
}

TEST_CASE("pipeline requires a depth map") {
    SynthResult r = generate_scene({.preset = SynthPreset::cuboid});
    r.scene.depth.reset();
    REQUIRE_THROWS_AS(estimate_layout(r.scene), std::invalid_argument);
}

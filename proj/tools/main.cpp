// Command-line front end: synthesize scenes, solve layouts, render depth,
// and evaluate predictions against ground truth.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "roomlayout/roomlayout.hpp"

namespace {

using namespace roomlayout;

Layout load_layout_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open layout file " + path);
    nlohmann::json j;
    is >> j;
    return layout_from_json(j);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << content;
}

struct SolveArgs {
    std::string scene_dir;
    std::string out_path;
    std::string mesh_path;
    double lambda = 1.0;
    int max_refine = 5;
    uint64_t seed = 0;
    bool no_refine = false;
    std::string depth_source;  // empty = as recorded in the scene
};

int run_solve(const SolveArgs& args) {
    SceneInput scene = load_scene(args.scene_dir);
    for (const std::string& w : scene.warnings) std::cerr << "warning: " << w << "\n";
    if (args.depth_source == "measured")
        scene.mode = DepthSource::measured;
    else if (args.depth_source == "provided-predicted")
        scene.mode = DepthSource::predicted;

    PipelineConfig cfg;
    cfg.solve.lambda = args.lambda;
    cfg.refine.max_iterations = args.max_refine;
    cfg.ransac.seed = args.seed;
    cfg.enable_refine = !args.no_refine;

    const PipelineResult result = estimate_layout(scene, cfg);
    if (!result.layout) throw std::runtime_error("no feasible partition");

    write_text_file(args.out_path, export_layout_json(*result.layout));
    if (!args.mesh_path.empty()) write_text_file(args.mesh_path, export_layout_obj(*result.layout));

    std::cout << "layout: " << result.layout->polygons.size() << " polygons, "
              << result.layout->corners.size() << " corners, " << result.layout->edges.size()
              << " edges\n"
              << "cost " << result.solution->cost << ", refinement iterations "
              << result.refine_iterations << " (" << result.stop_reason
              << "), mean discrepancy " << result.mean_discrepancy << " m\n";
    return 0;
}

int run_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& scene_dir, const std::string& out_path, bool force_uts) {
    const SceneInput scene = load_scene(scene_dir);
    const Layout pred = load_layout_file(pred_path);
    const Layout gt = load_layout_file(gt_path);

    EvalOptions opts;
    opts.compute_uts = force_uts || scene.mode == DepthSource::predicted;
    const MetricsReport report = evaluate_layouts(gt, pred, scene.intrinsics, opts);

    const nlohmann::json j = metrics_to_json(report);
    if (!out_path.empty()) write_text_file(out_path, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_render(const std::string& layout_path, const std::string& scene_dir,
               const std::string& out_path, const std::string& labels_path) {
    const SceneInput scene = load_scene(scene_dir);
    const Layout layout = load_layout_file(layout_path);
    const auto [depth, labels] = render_layout_depth(layout_to_render_polys(layout, scene.intrinsics),
                                                    scene.intrinsics);
    write_pfm(out_path, depth);
    if (!labels_path.empty()) {
        std::vector<uint8_t> pixels(labels.size(), 0);
        for (size_t i = 0; i < labels.size(); ++i) {
            const int32_t id = labels.data[i];
            if (id >= 254) throw std::runtime_error("too many polygons for an 8-bit label image");
            pixels[i] = id == kBackground ? 0 : static_cast<uint8_t>(id + 1);
        }
        write_png_gray8(labels_path, labels.width, labels.height, pixels);
    }
    std::cout << "rendered " << depth.width << "x" << depth.height << " depth to " << out_path
              << "\n";
    return 0;
}

struct SynthArgs {
    std::string preset = "cuboid";
    std::string out_dir;
    uint64_t seed = 0;
    double plane_noise_deg = 0.0;
    double depth_noise_m = 0.0;
    int erode_px = 0;
    std::vector<int> drop_planes;
    int furniture = 0;
    bool predicted = false;
    int width = 320;
    int height = 240;
};

int run_synth(const SynthArgs& args) {
    const auto preset = synth_preset_from_string(args.preset);
    if (!preset)
        throw std::runtime_error("unknown preset '" + args.preset +
                                 "' (cuboid, lshape, occluded-wall, no-floor, tshape)");
    SynthSpec spec;
    spec.preset = *preset;
    spec.seed = args.seed;
    spec.noise.plane_angle_deg = args.plane_noise_deg;
    spec.noise.depth_sigma_m = args.depth_noise_m;
    spec.noise.mask_erosion_px = args.erode_px;
    spec.noise.drop_planes = args.drop_planes;
    spec.noise.furniture = args.furniture;
    spec.predicted_mode = args.predicted;
    spec.image_width = args.width;
    spec.image_height = args.height;

    const SynthResult result = generate_scene(spec);
    save_scene(args.out_dir, result.scene);
    write_text_file((std::filesystem::path(args.out_dir) / "gt.json").string(),
                    export_layout_json(result.gt));
    std::cout << "wrote scene '" << args.preset << "' with " << result.scene.planes.size()
              << " planes and ground truth (" << result.gt.polygons.size() << " polygons) to "
              << args.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-view 3D room layout reconstruction"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand("solve", "Reconstruct a layout from a scene directory");
    solve->add_option("--scene", solve_args.scene_dir, "Scene directory")->required();
    solve->add_option("--out", solve_args.out_path, "Output layout JSON")->required();
    solve->add_option("--mesh", solve_args.mesh_path, "Also export a triangulated OBJ mesh")
        ->capture_default_str();
    solve->add_option("--lambda", solve_args.lambda, "Weight of the segmentation term")
        ->capture_default_str();
    solve->add_option("--max-refine", solve_args.max_refine, "Maximum refinement iterations")
        ->capture_default_str();
    solve->add_option("--seed", solve_args.seed, "RANSAC seed")->capture_default_str();
    solve->add_flag("--no-refine", solve_args.no_refine, "Disable render-and-compare refinement");
    solve->add_option("--depth-source", solve_args.depth_source,
                      "Override the scene depth source (measured|provided-predicted)")
        ->check(CLI::IsMember({"measured", "provided-predicted"}));

    std::string pred_path, gt_path, eval_scene, eval_out;
    bool force_uts = false;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a predicted layout against ground truth");
    eval->add_option("--pred", pred_path, "Predicted layout JSON")->required();
    eval->add_option("--gt", gt_path, "Ground-truth layout JSON")->required();
    eval->add_option("--scene", eval_scene, "Scene directory (for the intrinsics)")->required();
    eval->add_option("--out", eval_out, "Report JSON output path");
    eval->add_flag("--uts", force_uts, "Also report the median-scale-invariant RMSE");

    std::string render_layout_path, render_scene, render_out, render_labels;
    CLI::App* render = app.add_subcommand("render", "Render a layout's depth map");
    render->add_option("--layout", render_layout_path, "Layout JSON")->required();
    render->add_option("--scene", render_scene, "Scene directory (for the intrinsics)")->required();
    render->add_option("--out", render_out, "Output PFM depth map")->required();
    render->add_option("--labels", render_labels, "Optional polygon-label PNG (id+1, 0=background)");

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scene with ground truth");
    synth->add_option("--preset", synth_args.preset,
                      "cuboid, lshape, occluded-wall, no-floor, tshape")
        ->capture_default_str();
    synth->add_option("--out", synth_args.out_dir, "Output scene directory")->required();
    synth->add_option("--seed", synth_args.seed, "Noise seed")->capture_default_str();
    synth->add_option("--plane-noise-deg", synth_args.plane_noise_deg,
                      "Plane-normal noise stddev in degrees")
        ->capture_default_str();
    synth->add_option("--depth-noise-m", synth_args.depth_noise_m,
                      "Per-pixel depth noise stddev in meters")
        ->capture_default_str();
    synth->add_option("--erode-px", synth_args.erode_px, "Region mask erosion radius")
        ->capture_default_str();
    synth->add_option("--drop-planes", synth_args.drop_planes,
                      "Plane ids removed from the scene input");
    synth->add_option("--furniture", synth_args.furniture, "Number of box occluders")
        ->capture_default_str();
    synth->add_flag("--predicted", synth_args.predicted, "Flag the depth map as predicted");
    synth->add_option("--width", synth_args.width, "Image width")->capture_default_str();
    synth->add_option("--height", synth_args.height, "Image height")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(solve_args);
        if (eval->parsed()) return run_eval(pred_path, gt_path, eval_scene, eval_out, force_uts);
        if (render->parsed()) return run_render(render_layout_path, render_scene, render_out, render_labels);
        if (synth->parsed()) return run_synth(synth_args);
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}

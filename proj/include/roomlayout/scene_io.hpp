#pragma once

// Scene directory format:
//   scene.json  - intrinsics, mode, plane hypotheses, region mask references
//   depth.pfm   - z-depth in meters (see detail/pfm.hpp; 0 = invalid)
//   masks/*.png - 8-bit grayscale planar-region masks, 255 = region
// Camera frame: x right, y down, z forward.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "roomlayout/camera.hpp"
#include "roomlayout/cost.hpp"
#include "roomlayout/detail/pfm.hpp"
#include "roomlayout/detail/png.hpp"
#include "roomlayout/image.hpp"
#include "roomlayout/plane.hpp"

namespace roomlayout {

enum class DepthSource { measured, predicted };

inline const char* to_string(DepthSource mode) {
    return mode == DepthSource::measured ? "rgbd" : "rgb-predicted";
}

struct SceneInput {
    CameraIntrinsics intrinsics;
    std::optional<DepthMap> depth;
    std::vector<PlaneEq> planes;
    SegmentationRegions regions;
    DepthSource mode = DepthSource::measured;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string mask_filename(int plane_id) {
    return "masks/plane_" + std::to_string(plane_id) + ".png";
}

}  // namespace detail

inline void save_scene(const std::string& dir, const SceneInput& scene) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "masks");

    nlohmann::json j;
    j["camera_frame"] = "x right, y down, z forward; depth is camera-frame z in meters";
    j["intrinsics"] = {{"fx", scene.intrinsics.fx},   {"fy", scene.intrinsics.fy},
                       {"cx", scene.intrinsics.cx},   {"cy", scene.intrinsics.cy},
                       {"width", scene.intrinsics.width}, {"height", scene.intrinsics.height}};
    j["mode"] = to_string(scene.mode);
    if (scene.depth) {
        j["depth_file"] = "depth.pfm";
        write_pfm((fs::path(dir) / "depth.pfm").string(), *scene.depth);
    }
    j["planes"] = nlohmann::json::array();
    for (const PlaneEq& p : scene.planes) {
        j["planes"].push_back({{"id", p.id},
                               {"normal", {p.normal.x, p.normal.y, p.normal.z}},
                               {"offset", p.offset},
                               {"label", to_string(p.label)}});
    }
    j["regions"] = nlohmann::json::array();
    for (const auto& region : scene.regions.regions) {
        const std::string rel = detail::mask_filename(region.plane_id);
        j["regions"].push_back({{"plane", region.plane_id}, {"mask", rel}});
        std::vector<uint8_t> pixels(region.mask.pixel_count(), 0);
        region.mask.for_each_set([&](int x, int y) {
            pixels[static_cast<size_t>(y) * region.mask.width() + x] = 255;
        });
        write_png_gray8((fs::path(dir) / rel).string(), region.mask.width(),
                        region.mask.height(), pixels);
    }

    std::ofstream os(fs::path(dir) / "scene.json");
    if (!os) throw std::runtime_error("save_scene: cannot write scene.json in " + dir);
    os << j.dump(2) << "\n";
}

// Loads and validates a scene directory; every consistency violation is
// collected and reported together.
inline SceneInput load_scene(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> errors;

    const fs::path scene_path = fs::path(dir) / "scene.json";
    std::ifstream is(scene_path);
    if (!is) throw std::runtime_error("load_scene: missing " + scene_path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("load_scene: cannot parse scene.json: " + std::string(e.what()));
    }

    SceneInput scene;
    if (!j.contains("intrinsics")) {
        errors.push_back("missing intrinsics");
    } else {
        const auto& ji = j["intrinsics"];
        scene.intrinsics.fx = ji.value("fx", 0.0);
        scene.intrinsics.fy = ji.value("fy", 0.0);
        scene.intrinsics.cx = ji.value("cx", 0.0);
        scene.intrinsics.cy = ji.value("cy", 0.0);
        scene.intrinsics.width = ji.value("width", 0);
        scene.intrinsics.height = ji.value("height", 0);
        try {
            scene.intrinsics.validate();
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    }

    const std::string mode = j.value("mode", "rgbd");
    if (mode == "rgbd")
        scene.mode = DepthSource::measured;
    else if (mode == "rgb-predicted")
        scene.mode = DepthSource::predicted;
    else
        errors.push_back("unknown mode '" + mode + "'");

    if (j.contains("depth_file")) {
        const fs::path depth_path = fs::path(dir) / j["depth_file"].get<std::string>();
        if (!fs::exists(depth_path)) {
            errors.push_back("depth file " + depth_path.string() + " does not exist");
        } else {
            try {
                DepthMap d = read_pfm(depth_path.string());
                if (!d.same_size(scene.intrinsics.width, scene.intrinsics.height))
                    errors.push_back("depth map size does not match the intrinsics");
                else
                    scene.depth = std::move(d);
            } catch (const std::exception& e) {
                errors.push_back(e.what());
            }
        }
    } else if (scene.mode == DepthSource::measured) {
        errors.push_back("mode rgbd requires a depth file");
    }

    for (const auto& jp : j.value("planes", nlohmann::json::array())) {
        PlaneEq p;
        p.id = jp.value("id", -1);
        if (p.id < 0) errors.push_back("plane id must be a non-negative integer");
        const auto& n = jp.at("normal");
        p.normal = {n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>()};
        p.offset = jp.value("offset", 0.0);
        auto label = plane_label_from_string(jp.value("label", "wall"));
        if (!label) {
            errors.push_back("plane " + std::to_string(p.id) + ": unknown label");
            label = PlaneLabel::wall;
        }
        p.label = *label;
        const double len = norm(p.normal);
        if (std::fabs(len - 1.0) > 1e-3) {
            errors.push_back("plane " + std::to_string(p.id) + ": normal is not unit length");
        } else if (std::fabs(len - 1.0) > 1e-9 && len > 0.0) {
            p.normal = p.normal / len;
            scene.warnings.push_back("plane " + std::to_string(p.id) + ": normal renormalized");
        }
        for (const PlaneEq& other : scene.planes)
            if (other.id == p.id)
                errors.push_back("duplicate plane id " + std::to_string(p.id));
        scene.planes.push_back(p);
    }

    for (const auto& jr : j.value("regions", nlohmann::json::array())) {
        const int plane_id = jr.value("plane", -1);
        const std::string rel = jr.value("mask", "");
        bool known_plane = false;
        for (const PlaneEq& p : scene.planes) known_plane |= p.id == plane_id;
        if (!known_plane)
            errors.push_back("region references unknown plane " + std::to_string(plane_id));
        const fs::path mask_path = fs::path(dir) / rel;
        try {
            const GrayImage img = read_png_gray8(mask_path.string());
            if (img.width != scene.intrinsics.width || img.height != scene.intrinsics.height) {
                errors.push_back("mask " + rel + " has size " + std::to_string(img.width) + "x" +
                                 std::to_string(img.height) + ", expected " +
                                 std::to_string(scene.intrinsics.width) + "x" +
                                 std::to_string(scene.intrinsics.height));
                continue;
            }
            BitMask mask(img.width, img.height);
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x)
                    if (img.pixels[static_cast<size_t>(y) * img.width + x] >= 128) mask.set(x, y);
            scene.regions.regions.push_back({plane_id, std::move(mask)});
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    }

    if (!errors.empty()) {
        std::ostringstream os;
        os << "load_scene: " << errors.size() << " problem(s) in " << dir << ":";
        for (const std::string& e : errors) os << "\n  - " << e;
        throw std::runtime_error(os.str());
    }

    scene.regions.build_union(scene.intrinsics.width, scene.intrinsics.height);
    return scene;
}

}  // namespace roomlayout

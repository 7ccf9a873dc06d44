#include <catch2/catch.hpp>

#include <zlib.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "roomlayout/scene_io.hpp"
#include "test_helpers.hpp"

using namespace roomlayout;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("roomlayout_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("PFM round-trip is bit exact and bottom-up on disk") {
    const fs::path dir = temp_dir("pfm");
    DepthMap depth(2, 2, 0.0f);
    depth.at(0, 0) = 1.25f;
    depth.at(1, 0) = 2.5f;
    depth.at(0, 1) = 0.0f;  // invalid marker
    depth.at(1, 1) = 3.75f;

    const std::string path = (dir / "depth.pfm").string();
    write_pfm(path, depth);

    // Byte-level check: header, then the bottom row first.
    std::ifstream is(path, std::ios::binary);
    std::string header;
    std::getline(is, header);
    REQUIRE(header == "Pf");
    std::getline(is, header);
    REQUIRE(header == "2 2");
    std::getline(is, header);
    REQUIRE(header == "-1.0");
    float raw[4];
    is.read(reinterpret_cast<char*>(raw), sizeof(raw));
    REQUIRE(raw[0] == 0.0f);   // (0,1) bottom row first
    REQUIRE(raw[1] == 3.75f);  // (1,1)
    REQUIRE(raw[2] == 1.25f);  // (0,0)
    REQUIRE(raw[3] == 2.5f);   // (1,0)

    const DepthMap loaded = read_pfm(path);
    REQUIRE(loaded.width == 2);
    REQUIRE(loaded.height == 2);
    REQUIRE(loaded.data == depth.data);
}

TEST_CASE("PFM reader rejects foreign formats") {
    const fs::path dir = temp_dir("pfm_bad");
    {
        std::ofstream os(dir / "color.pfm", std::ios::binary);
        os << "PF\n2 2\n-1.0\n";
    }
    REQUIRE_THROWS_WITH(read_pfm((dir / "color.pfm").string()),
                        Catch::Contains("grayscale"));
    {
        std::ofstream os(dir / "big.pfm", std::ios::binary);
        os << "Pf\n2 2\n1.0\n";
    }
    REQUIRE_THROWS_WITH(read_pfm((dir / "big.pfm").string()), Catch::Contains("big-endian"));
}

TEST_CASE("PNG gray8 round-trip") {
    const fs::path dir = temp_dir("png");
    const int w = 37, h = 23;
    std::vector<uint8_t> pixels(static_cast<size_t>(w) * h);
    std::mt19937_64 rng(4);
    for (auto& p : pixels) p = static_cast<uint8_t>(rng() % 256);

    const std::string path = (dir / "mask.png").string();
    write_png_gray8(path, w, h, pixels);
    const GrayImage img = read_png_gray8(path);
    REQUIRE(img.width == w);
    REQUIRE(img.height == h);
    REQUIRE(img.pixels == pixels);
}

TEST_CASE("PNG reader handles the five scanline filters") {
    // Encode known pixels with each filter type by applying the filter
    // forward here; the reader must invert it exactly.
    const int w = 16, h = 5;
    std::vector<uint8_t> pixels(static_cast<size_t>(w) * h);
    std::mt19937_64 rng(8);
    for (auto& p : pixels) p = static_cast<uint8_t>(rng() % 256);

    std::vector<uint8_t> raw;
    for (int y = 0; y < h; ++y) {
        const uint8_t filter = static_cast<uint8_t>(y % 5);
        raw.push_back(filter);
        for (int x = 0; x < w; ++x) {
            const int cur = pixels[static_cast<size_t>(y) * w + x];
            const int a = x > 0 ? pixels[static_cast<size_t>(y) * w + x - 1] : 0;
            const int b = y > 0 ? pixels[static_cast<size_t>(y - 1) * w + x] : 0;
            const int c = (x > 0 && y > 0) ? pixels[static_cast<size_t>(y - 1) * w + x - 1] : 0;
            int enc = cur;
            switch (filter) {
                case 0: break;
                case 1: enc = cur - a; break;
                case 2: enc = cur - b; break;
                case 3: enc = cur - (a + b) / 2; break;
                case 4: {
                    const int p = a + b - c;
                    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
                    enc = cur - ((pa <= pb && pa <= pc) ? a : (pb <= pc ? b : c));
                    break;
                }
            }
            raw.push_back(static_cast<uint8_t>(enc & 0xff));
        }
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> compressed(bound);
    REQUIRE(compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) ==
            Z_OK);
    compressed.resize(bound);

    std::vector<uint8_t> file = {137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<uint8_t> ihdr;
    roomlayout::detail::png_put_u32(ihdr, w);
    roomlayout::detail::png_put_u32(ihdr, h);
    ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0});
    roomlayout::detail::png_chunk(file, "IHDR", ihdr);
    roomlayout::detail::png_chunk(file, "IDAT", compressed);
    roomlayout::detail::png_chunk(file, "IEND", {});

    const fs::path dir = temp_dir("png_filters");
    const std::string path = (dir / "filtered.png").string();
    {
        std::ofstream os(path, std::ios::binary);
        os.write(reinterpret_cast<const char*>(file.data()),
                 static_cast<std::streamsize>(file.size()));
    }
    const GrayImage img = read_png_gray8(path);
    REQUIRE(img.pixels == pixels);
}

TEST_CASE("PNG reader rejects unsupported color formats") {
    std::vector<uint8_t> file = {137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<uint8_t> ihdr;
    roomlayout::detail::png_put_u32(ihdr, 4);
    roomlayout::detail::png_put_u32(ihdr, 4);
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // RGB
    roomlayout::detail::png_chunk(file, "IHDR", ihdr);
    const fs::path dir = temp_dir("png_rgb");
    const std::string path = (dir / "rgb.png").string();
    {
        std::ofstream os(path, std::ios::binary);
        os.write(reinterpret_cast<const char*>(file.data()),
                 static_cast<std::streamsize>(file.size()));
    }
    REQUIRE_THROWS_WITH(read_png_gray8(path), Catch::Contains("grayscale"));
}

namespace {

SceneInput sample_scene() {
    SceneInput scene;
    scene.intrinsics = test_helpers::camera(32, 24, 20.0);
    scene.mode = DepthSource::measured;
    DepthMap depth(32, 24, 0.0f);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ud(0.5, 9.0);
    for (float& v : depth.data) v = static_cast<float>(ud(rng));
    depth.at(3, 3) = 0.0f;  // a hole survives the round trip
    scene.depth = depth;

    scene.planes.push_back(make_plane({0.12, -0.3, 1.0}, 2.34567890123456789, PlaneLabel::wall, 0));
    scene.planes.push_back(make_plane({0, 1, 0}, 1.5, PlaneLabel::floor, 3));

    BitMask m0(32, 24), m1(32, 24);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 32; ++x) m0.set(x, y);
    for (int y = 14; y < 24; ++y)
        for (int x = 5; x < 20; ++x) m1.set(x, y);
    scene.regions.regions.push_back({0, m0});
    scene.regions.regions.push_back({3, m1});
    scene.regions.build_union(32, 24);
    return scene;
}

}  // namespace

TEST_CASE("scene save/load round-trip preserves every field") {
    const fs::path dir = temp_dir("scene");
    const SceneInput scene = sample_scene();
    save_scene(dir.string(), scene);
    const SceneInput loaded = load_scene(dir.string());

    REQUIRE(loaded.intrinsics.fx == scene.intrinsics.fx);
    REQUIRE(loaded.intrinsics.width == scene.intrinsics.width);
    REQUIRE(loaded.mode == scene.mode);
    REQUIRE(loaded.depth);
    REQUIRE(loaded.depth->data == scene.depth->data);
    REQUIRE(loaded.planes.size() == scene.planes.size());
    for (size_t i = 0; i < scene.planes.size(); ++i) {
        REQUIRE(loaded.planes[i].id == scene.planes[i].id);
        REQUIRE(loaded.planes[i].label == scene.planes[i].label);
        REQUIRE(loaded.planes[i].offset == scene.planes[i].offset);
        REQUIRE(norm(loaded.planes[i].normal - scene.planes[i].normal) == 0.0);
    }
    REQUIRE(loaded.regions.regions.size() == scene.regions.regions.size());
    for (size_t i = 0; i < scene.regions.regions.size(); ++i) {
        REQUIRE(loaded.regions.regions[i].plane_id == scene.regions.regions[i].plane_id);
        REQUIRE(loaded.regions.regions[i].mask == scene.regions.regions[i].mask);
    }
}

TEST_CASE("load_scene reports a missing depth file in rgbd mode") {
    const fs::path dir = temp_dir("scene_nodepth");
    SceneInput scene = sample_scene();
    save_scene(dir.string(), scene);
    fs::remove(dir / "depth.pfm");
    // Rewrite scene.json without the depth reference but in rgbd mode.
    nlohmann::json j;
    {
        std::ifstream is(dir / "scene.json");
        is >> j;
    }
    j.erase("depth_file");
    {
        std::ofstream os(dir / "scene.json");
        os << j.dump(2);
    }
    REQUIRE_THROWS_WITH(load_scene(dir.string()), Catch::Contains("depth"));
}

TEST_CASE("load_scene names a mask with mismatched dimensions") {
    const fs::path dir = temp_dir("scene_badmask");
    const SceneInput scene = sample_scene();
    save_scene(dir.string(), scene);
    // Overwrite one mask with the wrong size.
    std::vector<uint8_t> pixels(8 * 8, 255);
    write_png_gray8((dir / "masks/plane_0.png").string(), 8, 8, pixels);
    REQUIRE_THROWS_WITH(load_scene(dir.string()), Catch::Contains("masks/plane_0.png"));
}

TEST_CASE("load_scene renormalizes slightly off normals and rejects bad ones") {
    const fs::path dir = temp_dir("scene_normals");
    const SceneInput scene = sample_scene();
    save_scene(dir.string(), scene);
    nlohmann::json j;
    {
        std::ifstream is(dir / "scene.json");
        is >> j;
    }
    // Slightly denormalized: accepted with a warning.
    j["planes"][0]["normal"] = {0.0, 0.0, 1.0 + 5e-4};
    {
        std::ofstream os(dir / "scene.json");
        os << j.dump(2);
    }
    const SceneInput warned = load_scene(dir.string());
    REQUIRE_FALSE(warned.warnings.empty());
    REQUIRE(std::fabs(norm(warned.planes[0].normal) - 1.0) < 1e-12);

    // Far from unit: rejected.
    j["planes"][0]["normal"] = {0.0, 0.0, 2.0};
    {
        std::ofstream os(dir / "scene.json");
        os << j.dump(2);
    }
    REQUIRE_THROWS_WITH(load_scene(dir.string()), Catch::Contains("unit length"));
}

TEST_CASE("load_scene rejects duplicate and negative plane ids") {
    const fs::path dir = temp_dir("scene_ids");
    const SceneInput scene = sample_scene();
    save_scene(dir.string(), scene);
    nlohmann::json j;
    {
        std::ifstream is(dir / "scene.json");
        is >> j;
    }
    j["planes"][1]["id"] = 0;  // duplicate
    {
        std::ofstream os(dir / "scene.json");
        os << j.dump(2);
    }
    REQUIRE_THROWS_WITH(load_scene(dir.string()), Catch::Contains("duplicate"));
}

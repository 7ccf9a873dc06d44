#pragma once

// PFM depth maps: header "Pf\n<width> <height>\n-1.0\n", then height rows of
// width little-endian float32 values, bottom row first. Values are meters
// (z-depth); 0 or non-finite marks invalid pixels.

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "roomlayout/image.hpp"

namespace roomlayout {

inline void write_pfm(const std::string& path, const DepthMap& depth) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_pfm: cannot open " + path);
    os << "Pf\n" << depth.width << " " << depth.height << "\n-1.0\n";
    std::vector<float> row(static_cast<size_t>(depth.width));
    for (int y = depth.height - 1; y >= 0; --y) {
        std::memcpy(row.data(), &depth.data[static_cast<size_t>(y) * depth.width],
                    row.size() * sizeof(float));
        os.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!os) throw std::runtime_error("write_pfm: write failed for " + path);
}

inline DepthMap read_pfm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_pfm: cannot open " + path);

    auto next_token = [&is, &path]() {
        std::string tok;
        if (!(is >> tok)) throw std::runtime_error("read_pfm: truncated header in " + path);
        return tok;
    };
    const std::string magic = next_token();
    if (magic != "Pf")
        throw std::runtime_error("read_pfm: " + path + " is not a grayscale PFM (magic '" +
                                 magic + "')");
    const int width = std::stoi(next_token());
    const int height = std::stoi(next_token());
    const double scale = std::stod(next_token());
    if (width <= 0 || height <= 0) throw std::runtime_error("read_pfm: bad dimensions in " + path);
    if (scale >= 0.0)
        throw std::runtime_error("read_pfm: big-endian PFM not supported (" + path + ")");
    is.get();  // single whitespace after the scale line

    DepthMap depth(width, height, 0.0f);
    std::vector<float> row(static_cast<size_t>(width));
    for (int y = height - 1; y >= 0; --y) {
        is.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!is) throw std::runtime_error("read_pfm: truncated data in " + path);
        std::memcpy(&depth.data[static_cast<size_t>(y) * width], row.data(),
                    row.size() * sizeof(float));
    }
    return depth;
}

}  // namespace roomlayout

#pragma once

// Minimal PNG reader/writer for 8-bit grayscale images (the mask format),
// backed by zlib. Writing emits unfiltered scanlines; reading handles the
// five standard filters but only bit depth 8, color type 0, no interlacing.

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace roomlayout {
namespace detail {

inline void png_put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline uint32_t png_get_u32(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

inline void png_chunk(std::vector<uint8_t>& out, const char type[4],
                      const std::vector<uint8_t>& payload) {
    png_put_u32(out, static_cast<uint32_t>(payload.size()));
    const size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const uLong crc = crc32(crc32(0L, nullptr, 0), out.data() + start,
                            static_cast<uInt>(out.size() - start));
    png_put_u32(out, static_cast<uint32_t>(crc));
}

}  // namespace detail

inline void write_png_gray8(const std::string& path, int width, int height,
                            const std::vector<uint8_t>& pixels) {
    if (width <= 0 || height <= 0 ||
        pixels.size() != static_cast<size_t>(width) * static_cast<size_t>(height))
        throw std::invalid_argument("write_png_gray8: bad dimensions");

    std::vector<uint8_t> raw;
    raw.reserve(static_cast<size_t>(height) * (static_cast<size_t>(width) + 1));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);  // filter: none
        raw.insert(raw.end(), pixels.begin() + static_cast<long>(y) * width,
                   pixels.begin() + static_cast<long>(y + 1) * width);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw std::runtime_error("write_png_gray8: compression failed");
    compressed.resize(bound);

    std::vector<uint8_t> out = {137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<uint8_t> ihdr;
    detail::png_put_u32(ihdr, static_cast<uint32_t>(width));
    detail::png_put_u32(ihdr, static_cast<uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(0);  // color type: grayscale
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // interlace
    detail::png_chunk(out, "IHDR", ihdr);
    detail::png_chunk(out, "IDAT", compressed);
    detail::png_chunk(out, "IEND", {});

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_png_gray8: cannot open " + path);
    os.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!os) throw std::runtime_error("write_png_gray8: write failed for " + path);
}

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;
};

inline GrayImage read_png_gray8(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_png_gray8: cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                               std::istreambuf_iterator<char>());
    static const uint8_t signature[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), signature, 8) != 0)
        throw std::runtime_error("read_png_gray8: " + path + " is not a PNG file");

    GrayImage img;
    std::vector<uint8_t> idat;
    bool saw_ihdr = false;
    size_t pos = 8;
    while (pos + 8 <= bytes.size()) {
        const uint32_t length = detail::png_get_u32(&bytes[pos]);
        if (pos + 12 + length > bytes.size())
            throw std::runtime_error("read_png_gray8: truncated chunk in " + path);
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        const uint8_t* payload = &bytes[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (length != 13) throw std::runtime_error("read_png_gray8: bad IHDR in " + path);
            img.width = static_cast<int>(detail::png_get_u32(payload));
            img.height = static_cast<int>(detail::png_get_u32(payload + 4));
            const int bit_depth = payload[8];
            const int color_type = payload[9];
            const int interlace = payload[12];
            if (bit_depth != 8 || color_type != 0 || interlace != 0)
                throw std::runtime_error("read_png_gray8: " + path +
                                         " must be 8-bit grayscale, non-interlaced");
            saw_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + length);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + length;
    }
    if (!saw_ihdr || img.width <= 0 || img.height <= 0)
        throw std::runtime_error("read_png_gray8: missing IHDR in " + path);

    const size_t stride = static_cast<size_t>(img.width) + 1;
    std::vector<uint8_t> raw(stride * static_cast<size_t>(img.height));
    uLongf raw_size = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_size != raw.size())
        throw std::runtime_error("read_png_gray8: corrupt image data in " + path);

    img.pixels.assign(static_cast<size_t>(img.width) * static_cast<size_t>(img.height), 0);
    std::vector<uint8_t> prev(static_cast<size_t>(img.width), 0);
    for (int y = 0; y < img.height; ++y) {
        const uint8_t filter = raw[static_cast<size_t>(y) * stride];
        const uint8_t* src = &raw[static_cast<size_t>(y) * stride + 1];
        uint8_t* dst = &img.pixels[static_cast<size_t>(y) * img.width];
        for (int x = 0; x < img.width; ++x) {
            const int a = x > 0 ? dst[x - 1] : 0;   // left
            const int b = prev[static_cast<size_t>(x)];  // up
            const int c = x > 0 ? prev[static_cast<size_t>(x - 1)] : 0;  // up-left
            int value = src[x];
            switch (filter) {
                case 0: break;
                case 1: value += a; break;
                case 2: value += b; break;
                case 3: value += (a + b) / 2; break;
                case 4: {
                    const int p = a + b - c;
                    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
                    value += (pa <= pb && pa <= pc) ? a : (pb <= pc ? b : c);
                    break;
                }
                default:
                    throw std::runtime_error("read_png_gray8: unknown filter in " + path);
            }
            dst[x] = static_cast<uint8_t>(value & 0xff);
        }
        std::memcpy(prev.data(), dst, static_cast<size_t>(img.width));
    }
    return img;
}

}  // namespace roomlayout

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace roomlayout {

template <typename T>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {
        if (w < 0 || h < 0) throw std::invalid_argument("Image: negative dimensions");
    }

    T& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    size_t size() const { return data.size(); }
    bool same_size(int w, int h) const { return width == w && height == h; }
};

// Depth in meters (z-depth, camera frame). Invalid marker: non-finite or <= 0.
using DepthMap = Image<float>;

inline bool depth_valid(float d) { return std::isfinite(d) && d > 0.0f; }

// Per-pixel polygon id; kBackground where nothing is rendered.
inline constexpr int32_t kBackground = -1;
using LabelMap = Image<int32_t>;

// Packed per-pixel bit mask.
class BitMask {
public:
    BitMask() = default;
    BitMask(int w, int h) : width_(w), height_(h), bits_((static_cast<size_t>(w) * h + 63) / 64, 0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    size_t pixel_count() const { return static_cast<size_t>(width_) * height_; }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

    bool get(int x, int y) const {
        const size_t i = static_cast<size_t>(y) * width_ + x;
        return (bits_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(int x, int y, bool value = true) {
        const size_t i = static_cast<size_t>(y) * width_ + x;
        if (value)
            bits_[i >> 6] |= (uint64_t{1} << (i & 63));
        else
            bits_[i >> 6] &= ~(uint64_t{1} << (i & 63));
    }

    size_t count() const {
        size_t n = 0;
        for (uint64_t w : bits_) n += static_cast<size_t>(__builtin_popcountll(w));
        return n;
    }

    size_t intersection_count(const BitMask& o) const {
        size_t n = 0;
        for (size_t i = 0; i < bits_.size(); ++i)
            n += static_cast<size_t>(__builtin_popcountll(bits_[i] & o.bits_[i]));
        return n;
    }

    size_t union_count(const BitMask& o) const {
        size_t n = 0;
        for (size_t i = 0; i < bits_.size(); ++i)
            n += static_cast<size_t>(__builtin_popcountll(bits_[i] | o.bits_[i]));
        return n;
    }

    BitMask& operator|=(const BitMask& o) {
        for (size_t i = 0; i < bits_.size(); ++i) bits_[i] |= o.bits_[i];
        return *this;
    }
    BitMask& operator&=(const BitMask& o) {
        for (size_t i = 0; i < bits_.size(); ++i) bits_[i] &= o.bits_[i];
        return *this;
    }
    // this := this & ~o
    BitMask& subtract(const BitMask& o) {
        for (size_t i = 0; i < bits_.size(); ++i) bits_[i] &= ~o.bits_[i];
        return *this;
    }

    bool empty() const {
        for (uint64_t w : bits_)
            if (w) return false;
        return true;
    }

    bool operator==(const BitMask& o) const {
        return width_ == o.width_ && height_ == o.height_ && bits_ == o.bits_;
    }

    const std::vector<uint64_t>& words() const { return bits_; }
    std::vector<uint64_t>& words() { return bits_; }

    template <typename Fn>
    void for_each_set(Fn&& fn) const {
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x)
                if (get(x, y)) fn(x, y);
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint64_t> bits_;
};

inline double mask_iou(const BitMask& a, const BitMask& b) {
    const size_t uni = a.union_count(b);
    if (uni == 0) return 0.0;
    return static_cast<double>(a.intersection_count(b)) / static_cast<double>(uni);
}

}  // namespace roomlayout

#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "roomlayout/camera.hpp"
#include "roomlayout/image.hpp"
#include "roomlayout/plane.hpp"

namespace roomlayout {

struct PlaneFitOptions {
    size_t min_support = 50;     // valid-depth pixels required
    double trim_factor = 2.0;    // residuals beyond trim_factor * MAD are dropped
    double max_rms = 0.05;       // meters; reject regions that are not planar
};

namespace detail {

// Total-least-squares plane through the points: smallest eigenvector of the
// centered covariance. Returns (unit normal, centroid).
inline std::optional<std::pair<Vec3, Vec3>> tls_plane(const std::vector<Vec3>& pts) {
    const size_t n = pts.size();
    if (n < 3) return std::nullopt;
    Vec3 c{0, 0, 0};
    for (const Vec3& p : pts) c += p;
    c = c / static_cast<double>(n);

    double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
    for (const Vec3& p : pts) {
        const Vec3 d = p - c;
        xx += d.x * d.x;
        xy += d.x * d.y;
        xz += d.x * d.z;
        yy += d.y * d.y;
        yz += d.y * d.z;
        zz += d.z * d.z;
    }
    const SymEigen3 eig = sym_eigen3(xx, xy, xz, yy, yz, zz);
    // Rank check: points on a line (or a point) have two near-zero eigenvalues.
    if (!(eig.eigenvalues[1] > 1e-12)) return std::nullopt;
    return std::make_pair(eig.eigenvectors[0], c);
}

}  // namespace detail

// Total-least-squares plane fit to the backprojected valid-depth pixels of a
// region mask, with one MAD trimming pass. The normal is oriented so that
// offset = normal . centroid > 0. Absent when support is too small or the
// trimmed residual RMS exceeds the inlier bound.
inline std::optional<PlaneEq> fit_plane_to_region(const CameraIntrinsics& K,
                                                  const DepthMap& depth,
                                                  const BitMask& mask,
                                                  PlaneLabel label = PlaneLabel::wall,
                                                  int id = -1,
                                                  const PlaneFitOptions& opts = {}) {
    std::vector<Vec3> pts;
    pts.reserve(mask.count());
    mask.for_each_set([&](int x, int y) {
        const float d = depth.at(x, y);
        if (depth_valid(d))
            pts.push_back(backproject(K, Pixel{x + 0.5, y + 0.5}, static_cast<double>(d)));
    });
    if (pts.size() < opts.min_support) return std::nullopt;

    auto fit = detail::tls_plane(pts);
    if (!fit) return std::nullopt;

    // One trimming pass on the residual distribution.
    {
        std::vector<double> res(pts.size());
        const Vec3 n = fit->first;
        const double d0 = dot(n, fit->second);
        for (size_t i = 0; i < pts.size(); ++i) res[i] = dot(n, pts[i]) - d0;

        std::vector<double> tmp = res;
        const size_t mid = tmp.size() / 2;
        std::nth_element(tmp.begin(), tmp.begin() + mid, tmp.end());
        const double med = tmp[mid];
        for (size_t i = 0; i < tmp.size(); ++i) tmp[i] = std::fabs(res[i] - med);
        std::nth_element(tmp.begin(), tmp.begin() + mid, tmp.end());
        const double mad = tmp[mid];

        if (mad > 1e-12) {
            const double limit = opts.trim_factor * mad;
            std::vector<Vec3> kept;
            kept.reserve(pts.size());
            for (size_t i = 0; i < pts.size(); ++i)
                if (std::fabs(res[i] - med) <= limit) kept.push_back(pts[i]);
            if (kept.size() >= opts.min_support) {
                auto refit = detail::tls_plane(kept);
                if (refit) {
                    fit = refit;
                    pts.swap(kept);
                }
            }
        }
    }

    const Vec3 n = fit->first;
    const double d0 = dot(n, fit->second);
    double sq = 0.0;
    for (const Vec3& p : pts) {
        const double r = dot(n, p) - d0;
        sq += r * r;
    }
    const double rms = std::sqrt(sq / static_cast<double>(pts.size()));
    if (rms > opts.max_rms) return std::nullopt;

    PlaneEq plane{n, d0, label, id};
    if (plane.offset < 0.0) plane = plane.flipped();
    return plane;
}

}  // namespace roomlayout

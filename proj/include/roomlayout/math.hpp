#pragma once

// Small fixed-size vector/matrix helpers used throughout the library.
// Camera frame everywhere: x right, y down, z forward (optical axis).

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace roomlayout {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::sqrt(dot(v, v)); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    return n > 0.0 ? v / n : Vec3{0.0, 0.0, 0.0};
}

// Angle between directions (radians, in [0, pi]).
inline double angle_between(const Vec3& a, const Vec3& b) {
    const double c = dot(normalized(a), normalized(b));
    return std::acos(std::fmax(-1.0, std::fmin(1.0, c)));
}

// Angle between undirected lines/normals (radians, in [0, pi/2]).
inline double undirected_angle(const Vec3& a, const Vec3& b) {
    const double c = std::fabs(dot(normalized(a), normalized(b)));
    return std::acos(std::fmin(1.0, c));
}

inline double det3(const Vec3& a, const Vec3& b, const Vec3& c) {
    return dot(a, cross(b, c));
}

// Symmetric 3x3 eigendecomposition by cyclic Jacobi rotations.
// Eigenvalues ascending; eigenvectors[i] is the unit eigenvector of eigenvalues[i].
struct SymEigen3 {
    std::array<double, 3> eigenvalues{};
    std::array<Vec3, 3> eigenvectors{};
};

inline SymEigen3 sym_eigen3(double a00, double a01, double a02,
                            double a11, double a12, double a22) {
    double a[3][3] = {{a00, a01, a02}, {a01, a11, a12}, {a02, a12, a22}};
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

    for (int sweep = 0; sweep < 64; ++sweep) {
        const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if (off < 1e-30) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::fabs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::array<int, 3> order = {0, 1, 2};
    for (int i = 0; i < 2; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (a[order[j]][order[j]] < a[order[i]][order[i]]) std::swap(order[i], order[j]);

    SymEigen3 out;
    for (int i = 0; i < 3; ++i) {
        const int k = order[i];
        out.eigenvalues[i] = a[k][k];
        out.eigenvectors[i] = normalized({v[0][k], v[1][k], v[2][k]});
    }
    return out;
}

// Closest distance between two 3D segments [a0,a1] and [b0,b1].
inline double segment_segment_distance(const Vec3& a0, const Vec3& a1,
                                       const Vec3& b0, const Vec3& b1) {
    const Vec3 u = a1 - a0;
    const Vec3 v = b1 - b0;
    const Vec3 w = a0 - b0;
    const double A = dot(u, u), B = dot(u, v), C = dot(v, v);
    const double D = dot(u, w), E = dot(v, w);
    const double denom = A * C - B * B;

    double s, t;
    if (denom < 1e-14 * A * C + 1e-300) {
        s = 0.0;
        t = (C > 0.0) ? E / C : 0.0;
    } else {
        s = (B * E - C * D) / denom;
        t = (A * E - B * D) / denom;
    }
    s = std::fmax(0.0, std::fmin(1.0, s));
    // Re-clamp t for the clamped s, then s for the clamped t.
    t = (C > 0.0) ? (E + B * s) / C : 0.0;
    t = std::fmax(0.0, std::fmin(1.0, t));
    s = (A > 0.0) ? (B * t - D) / A : 0.0;
    s = std::fmax(0.0, std::fmin(1.0, s));

    const Vec3 diff = (a0 + u * s) - (b0 + v * t);
    return norm(diff);
}

// Distance from point p to segment [a,b] in 2D.
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::fmax(0.0, std::fmin(1.0, t));
    const Vec2 q = a + ab * t;
    return norm(p - q);
}

// Proper or touching intersection test for 2D segments.
inline bool segments_intersect(const Vec2& p1, const Vec2& p2,
                               const Vec2& q1, const Vec2& q2) {
    auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        const double v = cross(b - a, c - a);
        if (v > 1e-12) return 1;
        if (v < -1e-12) return -1;
        return 0;
    };
    auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        return std::fmin(a.x, b.x) - 1e-12 <= c.x && c.x <= std::fmax(a.x, b.x) + 1e-12 &&
               std::fmin(a.y, b.y) - 1e-12 <= c.y && c.y <= std::fmax(a.y, b.y) + 1e-12;
    };
    const int o1 = orient(p1, p2, q1);
    const int o2 = orient(p1, p2, q2);
    const int o3 = orient(q1, q2, p1);
    const int o4 = orient(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

inline double polygon_signed_area(const std::vector<Vec2>& loop) {
    double acc = 0.0;
    const size_t n = loop.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = loop[i];
        const Vec2& b = loop[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    return 0.5 * acc;
}

}  // namespace roomlayout

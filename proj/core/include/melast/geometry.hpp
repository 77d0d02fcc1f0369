#pragma once

#include <array>
#include <cmath>

namespace melast {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    /// z-component of the cross product (scalar in 2D).
    constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    constexpr double norm2() const { return x * x + y * y; }
};

inline constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// 2x2 matrix, row-major: a(i,j) = row i, column j.
struct Mat2 {
    std::array<double, 4> a{0.0, 0.0, 0.0, 0.0};

    constexpr Mat2() = default;
    constexpr Mat2(double a00, double a01, double a10, double a11)
        : a{a00, a01, a10, a11} {}

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 rotation(double phi) {
        const double c = std::cos(phi), s = std::sin(phi);
        return {c, -s, s, c};
    }
    /// Outer product u v^T.
    static constexpr Mat2 outer(const Vec2& u, const Vec2& v) {
        return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
    }

    constexpr double operator()(int i, int j) const { return a[2 * i + j]; }
    double& operator()(int i, int j) { return a[2 * i + j]; }

    constexpr Mat2 operator+(const Mat2& o) const {
        return {a[0] + o.a[0], a[1] + o.a[1], a[2] + o.a[2], a[3] + o.a[3]};
    }
    constexpr Mat2 operator-(const Mat2& o) const {
        return {a[0] - o.a[0], a[1] - o.a[1], a[2] - o.a[2], a[3] - o.a[3]};
    }
    constexpr Mat2 operator*(double s) const {
        return {a[0] * s, a[1] * s, a[2] * s, a[3] * s};
    }
    constexpr Mat2 operator*(const Mat2& o) const {
        return {a[0] * o.a[0] + a[1] * o.a[2], a[0] * o.a[1] + a[1] * o.a[3],
                a[2] * o.a[0] + a[3] * o.a[2], a[2] * o.a[1] + a[3] * o.a[3]};
    }
    constexpr Vec2 operator*(const Vec2& v) const {
        return {a[0] * v.x + a[1] * v.y, a[2] * v.x + a[3] * v.y};
    }
    Mat2& operator+=(const Mat2& o) {
        for (int i = 0; i < 4; ++i) a[i] += o.a[i];
        return *this;
    }

    constexpr double det() const { return a[0] * a[3] - a[1] * a[2]; }
    constexpr double trace() const { return a[0] + a[3]; }
    constexpr Mat2 transpose() const { return {a[0], a[2], a[1], a[3]}; }
    /// Cofactor matrix: cof(i,j) = d det / d a(i,j).
    constexpr Mat2 cof() const { return {a[3], -a[2], -a[1], a[0]}; }
    /// Adjugate (transposed cofactor): F * adj(F) = det(F) * I.
    constexpr Mat2 adj() const { return {a[3], -a[1], -a[2], a[0]}; }
    constexpr Mat2 inverse() const {
        const double d = det();
        return {a[3] / d, -a[1] / d, -a[2] / d, a[0] / d};
    }
    constexpr double frob2() const {
        return a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3];
    }
    double frob() const { return std::sqrt(frob2()); }
    /// Frobenius inner product A:B.
    constexpr double ddot(const Mat2& o) const {
        return a[0] * o.a[0] + a[1] * o.a[1] + a[2] * o.a[2] + a[3] * o.a[3];
    }
    constexpr Vec2 col(int j) const { return {a[j], a[2 + j]}; }
    constexpr Vec2 row(int i) const { return {a[2 * i], a[2 * i + 1]}; }
};

inline constexpr Mat2 operator*(double s, const Mat2& m) { return m * s; }

}  // namespace melast

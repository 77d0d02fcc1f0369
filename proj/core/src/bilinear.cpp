#include "melast/bilinear.hpp"

#include <algorithm>
#include <cmath>

namespace melast {

namespace {
constexpr int kNewtonMaxIter = 20;
constexpr int kSubdivMaxDepth = 5;

double patch_scale(const std::array<Vec2, 4>& p) {
    double s = 0.0;
    for (int i = 1; i < 4; ++i) s = std::max(s, (p[i] - p[0]).norm());
    return std::max(s, 1e-300);
}

bool point_in_triangle(Vec2 q, Vec2 a, Vec2 b, Vec2 c, double tol, Vec2& bary) {
    const double d = (b - a).cross(c - a);
    if (std::abs(d) < 1e-300) return false;
    const double u = (q - a).cross(c - a) / d;
    const double v = (b - a).cross(q - a) / d;
    if (u < -tol || v < -tol || u + v > 1.0 + tol) return false;
    bary = {u, v};
    return true;
}
}  // namespace

Mat2 BilinearPatch::jacobian(double s, double t) const {
    const Vec2 e = p_[0] - p_[1] - p_[2] + p_[3];
    const Vec2 dds = (p_[1] - p_[0]) + e * t;
    const Vec2 ddt = (p_[2] - p_[0]) + e * s;
    return {dds.x, ddt.x, dds.y, ddt.y};
}

void BilinearPatch::bounding_box(Vec2& lo, Vec2& hi) const {
    lo = hi = p_[0];
    for (int i = 1; i < 4; ++i) {
        lo.x = std::min(lo.x, p_[i].x);
        lo.y = std::min(lo.y, p_[i].y);
        hi.x = std::max(hi.x, p_[i].x);
        hi.y = std::max(hi.y, p_[i].y);
    }
}

std::optional<Vec2> BilinearPatch::newton_from(Vec2 xi, double s0, double t0,
                                               double tol_in) const {
    const double scale = patch_scale(p_);
    double s = s0, t = t0;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        const Vec2 r = value(s, t) - xi;
        if (r.norm() <= 1e-13 * scale) {
            // Half-open inclusion: a point exactly on a shared cell edge
            // belongs to the neighbor that sees it at local coordinate 0,
            // so adjacent patches never both claim it.
            if (s >= -tol_in && s < 1.0 - tol_in && t >= -tol_in && t < 1.0 - tol_in)
                return Vec2{std::clamp(s, 0.0, 1.0), std::clamp(t, 0.0, 1.0)};
            return std::nullopt;
        }
        const Mat2 J = jacobian(s, t);
        const double d = J.det();
        if (std::abs(d) < 1e-14 * scale * scale) return std::nullopt;
        const Vec2 step = J.inverse() * r;
        s -= step.x;
        t -= step.y;
        if (std::abs(s) > 10.0 || std::abs(t) > 10.0) return std::nullopt;
    }
    return std::nullopt;
}

std::optional<Vec2> BilinearPatch::subdivide_search(Vec2 xi, double s0, double s1,
                                                    double t0, double t1, int depth,
                                                    double tol_in) const {
    const Vec2 c00 = value(s0, t0), c10 = value(s1, t0);
    const Vec2 c01 = value(s0, t1), c11 = value(s1, t1);
    Vec2 lo = c00, hi = c00;
    for (const Vec2& q : {c10, c01, c11}) {
        lo.x = std::min(lo.x, q.x); lo.y = std::min(lo.y, q.y);
        hi.x = std::max(hi.x, q.x); hi.y = std::max(hi.y, q.y);
    }
    const double pad = 1e-12 + 0.25 * std::max(hi.x - lo.x, hi.y - lo.y);
    if (xi.x < lo.x - pad || xi.x > hi.x + pad || xi.y < lo.y - pad || xi.y > hi.y + pad)
        return std::nullopt;

    if (depth >= kSubdivMaxDepth) {
        // Leaf: triangulate the sub-quad and return a barycentric estimate.
        // Triangle (c00, c10, c11) has local corners (s0,t0), (s1,t0), (s1,t1).
        auto in_convention = [&](Vec2 st) {
            return st.x >= -tol_in && st.x < 1.0 - tol_in && st.y >= -tol_in &&
                   st.y < 1.0 - tol_in;
        };
        Vec2 bary;
        const double tol = tol_in + 1e-9;
        std::optional<Vec2> est;
        if (point_in_triangle(xi, c00, c10, c11, tol, bary))
            est = Vec2{s0 + (bary.x + bary.y) * (s1 - s0), t0 + bary.y * (t1 - t0)};
        else if (point_in_triangle(xi, c00, c11, c01, tol, bary))
            est = Vec2{s0 + bary.x * (s1 - s0), t0 + (bary.x + bary.y) * (t1 - t0)};
        if (est && !in_convention(*est)) return std::nullopt;
        return est;
    }
    const double sm = 0.5 * (s0 + s1), tm = 0.5 * (t0 + t1);
    for (const auto& [a0, a1, b0, b1] :
         {std::array<double, 4>{s0, sm, t0, tm}, {sm, s1, t0, tm},
          {s0, sm, tm, t1}, {sm, s1, tm, t1}}) {
        if (auto r = subdivide_search(xi, a0, a1, b0, b1, depth + 1, tol_in)) {
            // Polish the leaf estimate with Newton, accepting a wide margin.
            if (auto n = newton_from(xi, r->x, r->y, tol_in)) return n;
            return r;
        }
    }
    return std::nullopt;
}

std::optional<Vec2> BilinearPatch::invert(Vec2 xi, double tol_in) const {
    Vec2 lo, hi;
    bounding_box(lo, hi);
    const double pad = 1e-12 * (1.0 + patch_scale(p_));
    if (xi.x < lo.x - pad || xi.x > hi.x + pad || xi.y < lo.y - pad || xi.y > hi.y + pad)
        return std::nullopt;

    if (auto r = newton_from(xi, 0.5, 0.5, tol_in)) return r;
    for (double s0 : {0.25, 0.75})
        for (double t0 : {0.25, 0.75})
            if (auto r = newton_from(xi, s0, t0, tol_in)) return r;
    return subdivide_search(xi, 0.0, 1.0, 0.0, 1.0, 0, tol_in);
}

}  // namespace melast

#pragma once

#include <array>
#include <optional>

#include "melast/geometry.hpp"

namespace melast {

/// Image of one reference cell under a bilinear map, given by the corner
/// values in (00, 10, 01, 11) order. Local coordinates live on [0,1]^2.
class BilinearPatch {
public:
    explicit BilinearPatch(const std::array<Vec2, 4>& corners) : p_(corners) {}

    Vec2 value(double s, double t) const {
        return p_[0] * ((1 - s) * (1 - t)) + p_[1] * (s * (1 - t)) +
               p_[2] * ((1 - s) * t) + p_[3] * (s * t);
    }
    /// Jacobian with respect to local coordinates (columns d/ds, d/dt).
    Mat2 jacobian(double s, double t) const;

    void bounding_box(Vec2& lo, Vec2& hi) const;

    /// Preimage of xi under the patch map, if xi lies inside the patch.
    /// Newton iteration from several seeds with a subdivision fallback for
    /// nearly folded patches; `tol_in` widens the inclusion test on [0,1]^2.
    std::optional<Vec2> invert(Vec2 xi, double tol_in = 1e-9) const;

    bool contains(Vec2 xi, double tol_in = 1e-9) const {
        return invert(xi, tol_in).has_value();
    }

private:
    std::optional<Vec2> newton_from(Vec2 xi, double s0, double t0, double tol_in) const;
    std::optional<Vec2> subdivide_search(Vec2 xi, double s0, double s1, double t0,
                                         double t1, int depth, double tol_in) const;
    std::array<Vec2, 4> p_;
};

}  // namespace melast

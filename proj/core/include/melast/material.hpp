#pragma once

#include "melast/geometry.hpp"

namespace melast {

/// Material constants of the stored energy
///   W(F, lambda) = Phi(L(lambda det F)^{-1} F),  Phi(X) = |X|^p + (det X)^{-a},
/// with L(z) = alpha z (x) z + beta (I - z (x) z) for unit z.
struct MaterialParams {
    double alpha = 1.0;   // director-parallel stiffness of L
    double beta = 1.0;    // director-orthogonal stiffness of L
    double p = 2.0;       // elastic exponent (> 1)
    double a = 2.0;       // determinant barrier exponent (> 1)
    double eps_d = 1e-4;  // dissipation smoothing length (optimizer only)

    void validate() const;

    Mat2 L(Vec2 z) const {
        return Mat2::outer(z, z) * alpha + (Mat2::identity() - Mat2::outer(z, z)) * beta;
    }
    Mat2 L_inverse(Vec2 z) const {
        return Mat2::outer(z, z) * (1.0 / alpha) +
               (Mat2::identity() - Mat2::outer(z, z)) * (1.0 / beta);
    }
    /// d L^{-1} / d theta given z = (cos theta, sin theta).
    Mat2 L_inverse_dtheta(Vec2 z, Vec2 z_perp) const {
        const Mat2 sym = Mat2::outer(z_perp, z) + Mat2::outer(z, z_perp);
        return sym * (1.0 / alpha - 1.0 / beta);
    }
};

/// Phi(X) = |X|^p + (det X)^{-a} and its derivative with respect to X.
/// Requires det X > 0.
double phi_density(const Mat2& X, double p, double a);
Mat2 phi_derivative(const Mat2& X, double p, double a);

/// Stored energy W(F, z/det F) for an admissible pair: equals
/// Phi(L(z)^{-1} F) because the L-argument lambda det F = z is unit.
double stored_energy(const Mat2& F, Vec2 z, const MaterialParams& mp);

/// Coercivity witness: W(F, z/det F) >= C' |F|^p + c1 (det F)^{-a} with
/// C' = max(alpha, beta)^{-p} and c1 = (alpha beta)^a, both derived from the
/// operator-norm bound of L^{-1}.
struct CoercivityCheck {
    bool holds = false;
    double margin = 0.0;  // W - bound (>= 0 when the check holds)
    double c_prime = 0.0;
    double c1 = 0.0;
};
CoercivityCheck coercivity_check(const Mat2& F, Vec2 z, const MaterialParams& mp);

}  // namespace melast

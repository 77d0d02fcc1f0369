#include "melast/material.hpp"

#include <cmath>

#include "melast/errors.hpp"

namespace melast {

void MaterialParams::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw ConfigError("material: alpha and beta must be positive");
    if (!(p > 1.0)) throw ConfigError("material: elastic exponent p must exceed 1");
    if (!(a > 1.0)) throw ConfigError("material: barrier exponent a must exceed 1");
    if (eps_d < 0.0) throw ConfigError("material: eps_d must be nonnegative");
}

double phi_density(const Mat2& X, double p, double a) {
    const double d = X.det();
    if (d <= 0.0) throw InputError("phi_density: det <= 0 (inadmissible state)");
    const double n2 = X.frob2();
    const double npow = (p == 2.0) ? n2 : std::pow(n2, 0.5 * p);
    return npow + std::pow(d, -a);
}

Mat2 phi_derivative(const Mat2& X, double p, double a) {
    const double d = X.det();
    if (d <= 0.0) throw InputError("phi_derivative: det <= 0 (inadmissible state)");
    const double n2 = X.frob2();
    const double coeff = (p == 2.0) ? 2.0 : p * std::pow(n2, 0.5 * p - 1.0);
    // d(det)/dX = cof X.
    return X * coeff - X.cof() * (a * std::pow(d, -a - 1.0));
}

double stored_energy(const Mat2& F, Vec2 z, const MaterialParams& mp) {
    return phi_density(mp.L_inverse(z) * F, mp.p, mp.a);
}

CoercivityCheck coercivity_check(const Mat2& F, Vec2 z, const MaterialParams& mp) {
    if (F.det() <= 0.0) throw InputError("coercivity_check: det F <= 0");
    CoercivityCheck out;
    out.c_prime = std::pow(std::max(mp.alpha, mp.beta), -mp.p);
    out.c1 = std::pow(mp.alpha * mp.beta, mp.a);
    const double W = stored_energy(F, z, mp);
    const double bound = out.c_prime * std::pow(F.frob2(), 0.5 * mp.p) +
                         out.c1 * std::pow(F.det(), -mp.a);
    out.margin = W - bound;
    out.holds = out.margin >= -1e-12 * (std::abs(W) + std::abs(bound));
    return out;
}

}  // namespace melast

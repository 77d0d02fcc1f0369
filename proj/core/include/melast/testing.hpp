#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "melast/fields.hpp"

namespace melast {

/// Deterministic xorshift64* uniform in [0,1); identical across platforms,
/// unlike the standard distributions.
double uniform01(std::uint64_t& state);
inline double uniform(std::uint64_t& state, double lo, double hi) {
    return lo + (hi - lo) * uniform01(state);
}

/// Smooth random perturbed-identity deformation with det Dy > 0.05 at every
/// quadrature point (the amplitude is shrunk until admissible).
DeformationField random_admissible_field(const RefGrid& grid, std::uint64_t& rng,
                                         double amplitude);

/// Random admissible state: perturbed-identity deformation plus a smooth
/// random director angle field.
State random_state(const RefGrid& grid, std::uint64_t& rng, double amp_y,
                   double amp_theta);

/// The angle-doubling map about a center: (r, phi) -> (r, 2 phi).
Vec2 angle_double(Vec2 x, Vec2 center);

/// Max relative error between an analytic gradient and central finite
/// differences of `value_of` over the DOFs listed in `dofs` (all when empty).
/// Relative to max(|analytic|, |fd|, floor).
double max_relative_fd_error(const std::function<double(const std::vector<double>&)>& value_of,
                             const std::vector<double>& x,
                             const std::vector<double>& analytic_grad,
                             const std::vector<int>& dofs, double step,
                             double floor = 1e-8);

}  // namespace melast

#pragma once

#include <vector>

#include "melast/fields.hpp"

namespace melast {

/// Dissipation distance between two states on the same grid. Under the
/// saturation parametrization the Lagrangian magnetization density is the
/// unit director, so D(q1, q2) = int |z1 - z2| dx.
struct Dissipation {
    double exact = 0.0;
    /// |v| replaced by sqrt(|v|^2 + eps^2) - eps; used inside the optimizer
    /// only, never in reported diagnostics.
    double smoothed = 0.0;
};

Dissipation dissipation(const State& q1, const State& q2, double eps_d);

/// Smoothed dissipation from the fixed previous director field to the angles
/// packed in q2 (value plus gradient with respect to q2's theta slots).
double dissipation_smoothed_grad(const DirectorField& z_prev, const State& q2,
                                 double eps_d, std::vector<double>* grad);

/// Exact dissipation from a fixed previous director field.
double dissipation_exact(const DirectorField& z_prev, const State& q2);

}  // namespace melast

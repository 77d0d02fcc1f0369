#pragma once

#include <vector>

#include "melast/fields.hpp"
#include "melast/loads.hpp"
#include "melast/material.hpp"

namespace melast {

class MaxwellContext;

/// Packed degree-of-freedom layout: y-node n occupies slots (2n, 2n+1),
/// the director angle of cell c occupies slot 2*num_nodes + c.
struct DofLayout {
    int num_nodes = 0;
    int num_cells = 0;

    explicit DofLayout(const RefGrid& g)
        : num_nodes(g.num_nodes()), num_cells(g.num_cells()) {}
    int size() const { return 2 * num_nodes + num_cells; }
    int y_dof(int node, int comp) const { return 2 * node + comp; }
    int theta_dof(int cell) const { return 2 * num_nodes + cell; }

    void pack(const State& q, std::vector<double>& x) const;
    void unpack(const std::vector<double>& x, State& q) const;
};

struct EnergyBreakdown {
    double e_el = 0.0;
    double e_exc = 0.0;
    double e_mag = 0.0;
    double l_work = 0.0;
    double b_pen = 0.0;
    double f_total = 0.0;  // e_el + e_exc + e_mag - l_work + b_pen
};

/// Elastic energy sum_qp w Phi(L(z)^{-1} Dy). Throws InputError when
/// det Dy <= 0 at a quadrature point. Gradient (if given) is accumulated
/// into the packed layout.
double elastic_energy(const State& q, const MaterialParams& mp,
                      std::vector<double>* grad = nullptr);

/// Exchange energy in Lagrangian pull-back form:
/// v = z / det Dy per cell, reference gradient by neighbor differences,
/// integrand |Dv (Dy)^{-1}|^2 det Dy at cell centers. Valid as the Eulerian
/// exchange integral where the deformation is injective.
double exchange_energy(const State& q, std::vector<double>* grad = nullptr);

/// Work of applied loads
///   L = int f . y + int_Sigma g . y da + int h(y) . z dx,
/// the Zeeman term already reduced to the reference domain by saturation.
double load_work(const State& q, const LoadSchedule& loads, double t,
                 std::vector<double>* grad = nullptr);

/// Relaxed Dirichlet penalty B = int_Gamma |d(t) - y|^p da.
double boundary_penalty(const State& q, const LoadSchedule& loads, double t,
                        const MaterialParams& mp, std::vector<double>* grad = nullptr);

/// Full breakdown F = E_el + E_exc + E_mag - L + B. The gradient of -L and
/// +B is accumulated with their signs. `maxwell` may be null to skip E_mag.
EnergyBreakdown total_energy(const State& q, const LoadSchedule& loads, double t,
                             const MaterialParams& mp, MaxwellContext* maxwell,
                             std::vector<double>* grad = nullptr);

/// Partial time derivative of F at fixed state,
///   -int df/dt . y - int_Sigma dg/dt . y - int dh/dt(y) . z
///   + p int_Gamma |d-y|^{p-2}(d-y) . dd/dt da,
/// with the piecewise-constant schedule rates. `knot` is set when t is a
/// schedule knot (the right-interval rate is used there).
struct TimeDerivative {
    double value = 0.0;
    bool knot = false;
};
TimeDerivative time_derivative(const State& q, const LoadSchedule& loads, double t,
                               const MaterialParams& mp);

/// int_{t0}^{t1} d_t F(tau, q) d tau by composite Simpson on each schedule
/// piece (exact for polynomial-in-time integrands up to degree 3).
double work_integral(const State& q, const LoadSchedule& loads, double t0,
                     double t1, const MaterialParams& mp,
                     int subdivisions_per_piece = 8);

}  // namespace melast

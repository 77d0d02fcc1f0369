#include "melast/dissipation.hpp"

#include <cmath>

#include "melast/errors.hpp"

namespace melast {

Dissipation dissipation(const State& q1, const State& q2, double eps_d) {
    const RefGrid& g = q1.grid();
    if (g.num_cells() != q2.grid().num_cells() || g.nx() != q2.grid().nx())
        throw InputError("dissipation: states live on different grids");
    Dissipation d;
    const double area = g.cell_area();
    for (int c = 0; c < g.num_cells(); ++c) {
        const double r = (q1.director.director(c) - q2.director.director(c)).norm();
        d.exact += r * area;
        d.smoothed += (std::sqrt(r * r + eps_d * eps_d) - eps_d) * area;
    }
    return d;
}

double dissipation_exact(const DirectorField& z_prev, const State& q2) {
    const RefGrid& g = q2.grid();
    double total = 0.0;
    for (int c = 0; c < g.num_cells(); ++c)
        total += (q2.director.director(c) - z_prev.director(c)).norm() * g.cell_area();
    return total;
}

double dissipation_smoothed_grad(const DirectorField& z_prev, const State& q2,
                                 double eps_d, std::vector<double>* grad) {
    const RefGrid& g = q2.grid();
    const int theta_offset = 2 * g.num_nodes();
    const double area = g.cell_area();
    double total = 0.0;
    for (int c = 0; c < g.num_cells(); ++c) {
        const Vec2 v = q2.director.director(c) - z_prev.director(c);
        const double root = std::sqrt(v.norm2() + eps_d * eps_d);
        total += (root - eps_d) * area;
        if (grad && root > 0.0)
            (*grad)[theta_offset + c] += area * v.dot(q2.director.director_perp(c)) / root;
    }
    return total;
}

}  // namespace melast

#include "melast/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "melast/errors.hpp"

namespace melast {

DeformationField::DeformationField(const RefGrid& grid)
    : grid_(&grid), y_(grid.num_nodes()) {}

DeformationField DeformationField::identity(const RefGrid& grid) {
    DeformationField f(grid);
    for (int j = 0; j <= grid.ny(); ++j)
        for (int i = 0; i <= grid.nx(); ++i)
            f.y_[grid.node_index(i, j)] = grid.node_pos(i, j);
    return f;
}

DeformationField DeformationField::interpolate(const RefGrid& grid,
                                               const std::function<Vec2(Vec2)>& map) {
    DeformationField f(grid);
    for (int j = 0; j <= grid.ny(); ++j)
        for (int i = 0; i <= grid.nx(); ++i)
            f.y_[grid.node_index(i, j)] = map(grid.node_pos(i, j));
    return f;
}

std::array<Vec2, 4> DeformationField::cell_corners(int c) const {
    const auto n = grid_->cell_nodes(c);
    return {y_[n[0]], y_[n[1]], y_[n[2]], y_[n[3]]};
}

Vec2 DeformationField::value(int c, double s, double t) const {
    const auto P = cell_corners(c);
    const auto N = shape_values(s, t);
    return P[0] * N[0] + P[1] * N[1] + P[2] * N[2] + P[3] * N[3];
}

Mat2 DeformationField::gradient(int c, double s, double t) const {
    const auto P = cell_corners(c);
    const auto ds = shape_ds(s, t);
    const auto dt = shape_dt(s, t);
    const Vec2 dyds = P[0] * ds[0] + P[1] * ds[1] + P[2] * ds[2] + P[3] * ds[3];
    const Vec2 dydt = P[0] * dt[0] + P[1] * dt[1] + P[2] * dt[2] + P[3] * dt[3];
    const double hx = grid_->hx(), hy = grid_->hy();
    return {dyds.x / hx, dydt.x / hy,
            dyds.y / hx, dydt.y / hy};
}

double DeformationField::det_at(int c, double s, double t) const {
    return gradient(c, s, t).det();
}

Vec2 DeformationField::det_grad_st(int c, double s, double t) const {
    const auto P = cell_corners(c);
    const double hx = grid_->hx(), hy = grid_->hy();
    const Vec2 e = P[0] - P[1] - P[2] + P[3];  // coefficient of the st term
    const Vec2 dyds = (P[1] - P[0]) + e * t;   // * (1/hx) for x-derivative
    const Vec2 dydt = (P[2] - P[0]) + e * s;
    // det = (dyds x dydt) / (hx hy); dyds depends only on t, dydt only on s.
    const double dds = dyds.cross(e) / (hx * hy);
    const double ddt = e.cross(dydt) / (hx * hy);
    return {dds, ddt};
}

double DeformationField::min_det_at_quadrature() const {
    double dmin = std::numeric_limits<double>::infinity();
    for (int c = 0; c < grid_->num_cells(); ++c)
        for (const auto& q : grid_->quad_points())
            dmin = std::min(dmin, det_at(c, q.s, q.t));
    return dmin;
}

bool DeformationField::admissible(double det_floor) const {
    return min_det_at_quadrature() > det_floor;
}

void DeformationField::bounding_box(Vec2& lo, Vec2& hi) const {
    lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    hi = {-lo.x, -lo.y};
    for (const Vec2& p : y_) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
}

Mat2 deformation_gradient(const DeformationField& y, int cell, int qp) {
    const auto& qps = y.grid().quad_points();
    if (cell < 0 || cell >= y.grid().num_cells())
        throw InputError("deformation_gradient: cell index out of range");
    const auto& q = qps.at(static_cast<size_t>(qp));
    return y.gradient(cell, q.s, q.t);
}

DirectorField::DirectorField(const RefGrid& grid, double theta0)
    : grid_(&grid), theta_(grid.num_cells(), theta0) {}

DirectorField DirectorField::interpolate(const RefGrid& grid,
                                         const std::function<double(Vec2)>& theta_at) {
    DirectorField f(grid);
    for (int c = 0; c < grid.num_cells(); ++c)
        f.theta_[c] = theta_at(grid.cell_center(c));
    return f;
}

double State::saturation_defect() const {
    // |m o y| det Dy = |z / det| * det = |z|; independent of y by design.
    double worst = 0.0;
    for (int c = 0; c < grid().num_cells(); ++c) {
        const Vec2 z = director.director(c);
        worst = std::max(worst, std::abs(z.norm() - 1.0));
    }
    return worst;
}

Minors minors(const Mat2& F) {
    return {F, F.cof(), F.det()};
}

double check_div_identities(const DeformationField& y,
                            const std::function<Vec2(Vec2)>& psi,
                            const std::function<Mat2(Vec2)>& dpsi,
                            const std::function<double(Vec2)>& phi,
                            const std::function<Vec2(Vec2)>& dphi) {
    const RefGrid& g = y.grid();

    // phi must vanish on the domain boundary (compact support proxy).
    const int nb = 4 * std::max(g.nx(), g.ny());
    double phi_max = 0.0;
    for (int k = 0; k < nb; ++k) {
        const double u = static_cast<double>(k) / nb;
        const double px = g.origin().x + g.extent().x * u;
        const double py = g.origin().y + g.extent().y * u;
        phi_max = std::max({phi_max,
                            std::abs(phi({px, g.origin().y})),
                            std::abs(phi({px, g.origin().y + g.extent().y})),
                            std::abs(phi({g.origin().x, py})),
                            std::abs(phi({g.origin().x + g.extent().x, py}))});
    }
    if (phi_max > 1e-12)
        throw InputError("check_div_identities: phi does not vanish on the boundary");

    double lhs = 0.0, rhs = 0.0;
    const double cell_area = g.cell_area();
    for (int c = 0; c < g.num_cells(); ++c) {
        for (const auto& q : g.quad_points()) {
            const Vec2 x = g.cell_point(c, q.s, q.t);
            const Vec2 yx = y.value(c, q.s, q.t);
            const Mat2 F = y.gradient(c, q.s, q.t);
            const double w = q.w * cell_area;
            lhs += -w * (F.adj() * psi(yx)).dot(dphi(x));
            rhs += w * dpsi(yx).trace() * F.det() * phi(x);
        }
    }
    return std::abs(lhs - rhs);
}

}  // namespace melast

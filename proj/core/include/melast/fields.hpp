#pragma once

#include <array>
#include <functional>
#include <vector>

#include "melast/geometry.hpp"
#include "melast/ref_grid.hpp"

namespace melast {

/// Nodal deformation y: Omega -> R^2, bilinear within each cell.
class DeformationField {
public:
    explicit DeformationField(const RefGrid& grid);

    /// Identity deformation y(x) = x.
    static DeformationField identity(const RefGrid& grid);
    /// Nodal interpolation of a closed-form map.
    static DeformationField interpolate(const RefGrid& grid,
                                        const std::function<Vec2(Vec2)>& map);

    const RefGrid& grid() const { return *grid_; }
    const std::vector<Vec2>& nodes() const { return y_; }
    std::vector<Vec2>& nodes() { return y_; }
    Vec2 node(int n) const { return y_[n]; }

    /// Corner values of cell c in (00, 10, 01, 11) order.
    std::array<Vec2, 4> cell_corners(int c) const;

    /// Deformed position at local coordinates (s,t) of cell c.
    Vec2 value(int c, double s, double t) const;
    /// Deformation gradient F = Dy at local coordinates (s,t) of cell c.
    Mat2 gradient(int c, double s, double t) const;
    /// det Dy at local coordinates (s,t) of cell c.
    double det_at(int c, double s, double t) const;
    /// Gradient of det Dy with respect to local coordinates (d/ds, d/dt).
    Vec2 det_grad_st(int c, double s, double t) const;

    /// Minimum of det Dy over all quadrature points of all cells.
    double min_det_at_quadrature() const;
    /// True if det Dy > floor at every quadrature point.
    bool admissible(double det_floor = 0.0) const;

    /// Axis-aligned bounding box of the deformed nodes.
    void bounding_box(Vec2& lo, Vec2& hi) const;

private:
    const RefGrid* grid_;
    std::vector<Vec2> y_;
};

/// Deformation gradient at a quadrature point (by index into the grid rule).
Mat2 deformation_gradient(const DeformationField& y, int cell, int qp);

/// Per-cell unit director z = (cos theta, sin theta), stored as the angle.
class DirectorField {
public:
    explicit DirectorField(const RefGrid& grid, double theta0 = 0.0);
    static DirectorField interpolate(const RefGrid& grid,
                                     const std::function<double(Vec2)>& theta_at);

    const RefGrid& grid() const { return *grid_; }
    const std::vector<double>& angles() const { return theta_; }
    std::vector<double>& angles() { return theta_; }
    double angle(int c) const { return theta_[c]; }

    Vec2 director(int c) const {
        return {std::cos(theta_[c]), std::sin(theta_[c])};
    }
    /// d z / d theta, orthogonal to the director.
    Vec2 director_perp(int c) const {
        return {-std::sin(theta_[c]), std::cos(theta_[c])};
    }

private:
    const RefGrid* grid_;
    std::vector<double> theta_;
};

/// Admissible state q = (y, z). The Lagrangian magnetization is recovered
/// as m o y = z / det Dy, so |m o y| det Dy = |z| = 1 holds by construction.
struct State {
    DeformationField deformation;
    DirectorField director;

    State(DeformationField y, DirectorField z)
        : deformation(std::move(y)), director(std::move(z)) {}

    static State reference(const RefGrid& grid, double theta0 = 0.0) {
        return {DeformationField::identity(grid), DirectorField(grid, theta0)};
    }

    const RefGrid& grid() const { return deformation.grid(); }

    /// Worst-case saturation defect | |m o y| det Dy - 1 | over all
    /// quadrature points; only director rounding can make it nonzero.
    double saturation_defect() const;
};

/// Matrix minors (F, cof F, det F) as used by the polyconvex stored energy.
struct Minors {
    Mat2 F;
    Mat2 cof;
    double det;
};
Minors minors(const Mat2& F);

/// Quadrature residual of the weak divergence identity
///   -int (adj Dy . psi(y)) . Dphi dx = int (div psi)(y) det Dy phi dx
/// for a test field psi (with Jacobian) and scalar phi vanishing on the
/// domain boundary. Returns |lhs - rhs|.
double check_div_identities(const DeformationField& y,
                            const std::function<Vec2(Vec2)>& psi,
                            const std::function<Mat2(Vec2)>& dpsi,
                            const std::function<double(Vec2)>& phi,
                            const std::function<Vec2(Vec2)>& dphi);

}  // namespace melast

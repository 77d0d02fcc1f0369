#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "melast/geometry.hpp"

namespace melast {

enum class QuadratureRule { Midpoint, Gauss2x2 };

QuadratureRule quadrature_rule_from_string(const std::string& name);
std::string to_string(QuadratureRule rule);

/// One quadrature point on the unit cell [0,1]^2 with its weight
/// (weights sum to 1; physical weight is w * hx * hy).
struct QuadPoint {
    double s, t, w;
};

/// Named boundary edges of the rectangular reference domain.
enum class Side { Bottom = 0, Right = 1, Top = 2, Left = 3 };

/// A boundary edge: side of boundary cell `cell`, spanning grid nodes
/// `n0` -> `n1` (counterclockwise around the domain).
struct BoundaryEdge {
    Side side;
    int cell;
    int n0, n1;
};

/// Uniform structured grid of bilinear (Q1) cells on the rectangle
/// [origin, origin + extent].
class RefGrid {
public:
    RefGrid(int nx, int ny, Vec2 origin, Vec2 extent,
            QuadratureRule rule = QuadratureRule::Gauss2x2);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    Vec2 origin() const { return origin_; }
    Vec2 extent() const { return extent_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    /// Cell spacing for square-cell grids (hx == hy).
    double h() const { return hx_; }
    bool square_cells() const;
    double area() const { return extent_.x * extent_.y; }
    double cell_area() const { return hx_ * hy_; }
    QuadratureRule rule() const { return rule_; }

    int num_nodes() const { return (nx_ + 1) * (ny_ + 1); }
    int num_cells() const { return nx_ * ny_; }

    int node_index(int i, int j) const { return j * (nx_ + 1) + i; }
    int cell_index(int i, int j) const { return j * nx_ + i; }
    int cell_i(int c) const { return c % nx_; }
    int cell_j(int c) const { return c / nx_; }

    Vec2 node_pos(int i, int j) const {
        return {origin_.x + i * hx_, origin_.y + j * hy_};
    }
    Vec2 cell_origin(int c) const {
        return {origin_.x + cell_i(c) * hx_, origin_.y + cell_j(c) * hy_};
    }
    Vec2 cell_center(int c) const {
        return cell_origin(c) + Vec2{0.5 * hx_, 0.5 * hy_};
    }
    /// Reference point at local coordinates (s,t) in cell c.
    Vec2 cell_point(int c, double s, double t) const {
        return cell_origin(c) + Vec2{s * hx_, t * hy_};
    }

    /// Node indices of cell c in (00, 10, 01, 11) order.
    std::array<int, 4> cell_nodes(int c) const {
        const int i = cell_i(c), j = cell_j(c);
        return {node_index(i, j), node_index(i + 1, j),
                node_index(i, j + 1), node_index(i + 1, j + 1)};
    }

    /// Cell containing a reference point, clamped to the domain.
    int locate_cell(Vec2 x) const;

    const std::vector<QuadPoint>& quad_points() const { return qps_; }

    /// Boundary edges of one side, ordered counterclockwise.
    std::vector<BoundaryEdge> side_edges(Side side) const;
    /// All boundary edges for a set of named sides.
    std::vector<BoundaryEdge> edges_for_sides(const std::vector<Side>& sides) const;

private:
    int nx_, ny_;
    Vec2 origin_, extent_;
    double hx_, hy_;
    QuadratureRule rule_;
    std::vector<QuadPoint> qps_;
};

/// Bilinear shape function values at local (s,t), order (00, 10, 01, 11).
inline std::array<double, 4> shape_values(double s, double t) {
    return {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
}
/// d/ds of the shape functions.
inline std::array<double, 4> shape_ds(double /*s*/, double t) {
    return {-(1 - t), (1 - t), -t, t};
}
/// d/dt of the shape functions.
inline std::array<double, 4> shape_dt(double s, double /*t*/) {
    return {-(1 - s), -s, (1 - s), s};
}

}  // namespace melast

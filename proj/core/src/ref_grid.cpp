#include "melast/ref_grid.hpp"

#include <algorithm>
#include <cmath>

#include "melast/errors.hpp"

namespace melast {

QuadratureRule quadrature_rule_from_string(const std::string& name) {
    if (name == "midpoint") return QuadratureRule::Midpoint;
    if (name == "gauss2" || name == "gauss2x2") return QuadratureRule::Gauss2x2;
    throw ConfigError("unknown quadrature rule '" + name + "' (use midpoint or gauss2)");
}

std::string to_string(QuadratureRule rule) {
    return rule == QuadratureRule::Midpoint ? "midpoint" : "gauss2";
}

RefGrid::RefGrid(int nx, int ny, Vec2 origin, Vec2 extent, QuadratureRule rule)
    : nx_(nx), ny_(ny), origin_(origin), extent_(extent), rule_(rule) {
    if (nx < 2) throw ConfigError("nx too small: need nx >= 2, got " + std::to_string(nx));
    if (ny < 2) throw ConfigError("ny too small: need ny >= 2, got " + std::to_string(ny));
    if (!(extent.x > 0.0) || !(extent.y > 0.0))
        throw ConfigError("grid extent must be positive");
    hx_ = extent.x / nx;
    hy_ = extent.y / ny;

    if (rule_ == QuadratureRule::Midpoint) {
        qps_ = {{0.5, 0.5, 1.0}};
    } else {
        const double g = 0.5 / std::sqrt(3.0);
        const double lo = 0.5 - g, hi = 0.5 + g;
        qps_ = {{lo, lo, 0.25}, {hi, lo, 0.25}, {lo, hi, 0.25}, {hi, hi, 0.25}};
    }
}

bool RefGrid::square_cells() const {
    return std::abs(hx_ - hy_) <= 1e-14 * std::max(hx_, hy_);
}

int RefGrid::locate_cell(Vec2 x) const {
    int i = static_cast<int>(std::floor((x.x - origin_.x) / hx_));
    int j = static_cast<int>(std::floor((x.y - origin_.y) / hy_));
    i = std::clamp(i, 0, nx_ - 1);
    j = std::clamp(j, 0, ny_ - 1);
    return cell_index(i, j);
}

std::vector<BoundaryEdge> RefGrid::side_edges(Side side) const {
    std::vector<BoundaryEdge> edges;
    switch (side) {
        case Side::Bottom:
            for (int i = 0; i < nx_; ++i)
                edges.push_back({side, cell_index(i, 0), node_index(i, 0), node_index(i + 1, 0)});
            break;
        case Side::Right:
            for (int j = 0; j < ny_; ++j)
                edges.push_back({side, cell_index(nx_ - 1, j), node_index(nx_, j), node_index(nx_, j + 1)});
            break;
        case Side::Top:
            for (int i = nx_ - 1; i >= 0; --i)
                edges.push_back({side, cell_index(i, ny_ - 1), node_index(i + 1, ny_), node_index(i, ny_)});
            break;
        case Side::Left:
            for (int j = ny_ - 1; j >= 0; --j)
                edges.push_back({side, cell_index(0, j), node_index(0, j + 1), node_index(0, j)});
            break;
    }
    return edges;
}

std::vector<BoundaryEdge> RefGrid::edges_for_sides(const std::vector<Side>& sides) const {
    std::vector<BoundaryEdge> all;
    for (Side s : sides) {
        auto e = side_edges(s);
        all.insert(all.end(), e.begin(), e.end());
    }
    return all;
}

}  // namespace melast

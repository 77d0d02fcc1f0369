#include "melast/euler_grid.hpp"

#include <algorithm>
#include <cmath>

#include "melast/errors.hpp"

namespace melast {

EulerianGrid::EulerianGrid(Vec2 lo, Vec2 hi, int mx, int my)
    : lo_(lo), hi_(hi), mx_(mx), my_(my) {
    if (mx < 2 || my < 2) throw ConfigError("Eulerian grid needs mx, my >= 2");
    if (!(hi.x > lo.x) || !(hi.y > lo.y))
        throw ConfigError("Eulerian bounding box must have positive extent");
    hx_ = (hi.x - lo.x) / mx;
    hy_ = (hi.y - lo.y) / my;
}

EulerianGrid EulerianGrid::around(const DeformationField& y, int mx, int my,
                                  double padding) {
    Vec2 lo, hi;
    y.bounding_box(lo, hi);
    const double diam = std::hypot(hi.x - lo.x, hi.y - lo.y);
    const double pad = padding * diam;
    return EulerianGrid({lo.x - pad, lo.y - pad}, {hi.x + pad, hi.y + pad}, mx, my);
}

double EulerianGrid::cell_diag() const { return std::hypot(hx_, hy_); }

int EulerianGrid::locate(Vec2 xi) const {
    if (!contains(xi)) return -1;
    int i = static_cast<int>(std::floor((xi.x - lo_.x) / hx_));
    int j = static_cast<int>(std::floor((xi.y - lo_.y) / hy_));
    i = std::clamp(i, 0, mx_ - 1);
    j = std::clamp(j, 0, my_ - 1);
    return cell_index(i, j);
}

}  // namespace melast

#pragma once

#include <vector>

#include "melast/fields.hpp"
#include "melast/geometry.hpp"

namespace melast {

/// Cell-centered grid on a bounding box in the actual (deformed) space.
/// Carries the rasterized magnetization, stray potential, degree and
/// multiplicity fields.
class EulerianGrid {
public:
    EulerianGrid(Vec2 lo, Vec2 hi, int mx, int my);

    /// Box around the deformed image of the grid with a margin of
    /// `padding` times the image diameter on each side.
    static EulerianGrid around(const DeformationField& y, int mx, int my,
                               double padding = 1.0);

    Vec2 lo() const { return lo_; }
    Vec2 hi() const { return hi_; }
    int mx() const { return mx_; }
    int my() const { return my_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double cell_area() const { return hx_ * hy_; }
    double cell_diag() const;
    int num_cells() const { return mx_ * my_; }

    int cell_index(int i, int j) const { return j * mx_ + i; }
    int cell_i(int c) const { return c % mx_; }
    int cell_j(int c) const { return c / mx_; }
    Vec2 cell_center(int c) const {
        return {lo_.x + (cell_i(c) + 0.5) * hx_, lo_.y + (cell_j(c) + 0.5) * hy_};
    }
    bool on_box_edge(int c) const {
        const int i = cell_i(c), j = cell_j(c);
        return i == 0 || j == 0 || i == mx_ - 1 || j == my_ - 1;
    }
    /// Cell whose center is nearest to xi, or -1 if outside the box.
    int locate(Vec2 xi) const;

    bool contains(Vec2 p) const {
        return p.x >= lo_.x && p.x <= hi_.x && p.y >= lo_.y && p.y <= hi_.y;
    }

private:
    Vec2 lo_, hi_;
    int mx_, my_;
    double hx_, hy_;
};

}  // namespace melast

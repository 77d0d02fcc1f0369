#pragma once

#include <string>
#include <vector>

#include "melast/fields.hpp"
#include "melast/ref_grid.hpp"

namespace melast {

/// Plain-text grid snapshot: header `nx ny h origin_x origin_y`, then one
/// whitespace-separated row per record. Values are printed with 17
/// significant digits, so doubles round-trip bit-exactly.
struct GridSnapshot {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    Vec2 origin;
    int components = 0;
    /// Row-major records (node or cell order), `components` values each.
    std::vector<double> values;
};

void write_snapshot(const std::string& path, const GridSnapshot& snap);
GridSnapshot read_snapshot(const std::string& path);

/// Nodal deformation snapshot (one row per node, 2 components).
void write_deformation(const std::string& path, const DeformationField& y);
DeformationField read_deformation(const std::string& path, const RefGrid& grid);

/// Director snapshot (one row per cell, 1 component: the angle).
void write_director(const std::string& path, const DirectorField& z);
DirectorField read_director(const std::string& path, const RefGrid& grid);

/// Format a double with 17 significant digits (shortest round-trip-safe form).
std::string format_g17(double v);

}  // namespace melast

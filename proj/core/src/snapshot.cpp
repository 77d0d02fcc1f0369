#include "melast/snapshot.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "melast/errors.hpp"

namespace melast {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_snapshot(const std::string& path, const GridSnapshot& snap) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open snapshot file for writing: " + path);
    out << snap.nx << ' ' << snap.ny << ' ' << format_g17(snap.h) << ' '
        << format_g17(snap.origin.x) << ' ' << format_g17(snap.origin.y) << '\n';
    const size_t rows = snap.components > 0 ? snap.values.size() / snap.components : 0;
    for (size_t r = 0; r < rows; ++r) {
        for (int c = 0; c < snap.components; ++c) {
            if (c) out << ' ';
            out << format_g17(snap.values[r * snap.components + c]);
        }
        out << '\n';
    }
    if (!out) throw InputError("write failed for snapshot file: " + path);
}

GridSnapshot read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open snapshot file: " + path);
    GridSnapshot snap;
    std::string header;
    if (!std::getline(in, header))
        throw InputError("empty snapshot file: " + path);
    {
        std::istringstream hs(header);
        if (!(hs >> snap.nx >> snap.ny >> snap.h >> snap.origin.x >> snap.origin.y))
            throw InputError("malformed snapshot header in " + path);
    }
    std::string line;
    int components = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int n = 0;
        double v;
        while (ls >> v) {
            snap.values.push_back(v);
            ++n;
        }
        if (n == 0) continue;
        if (components < 0) components = n;
        else if (n != components)
            throw InputError("inconsistent row width in snapshot " + path);
    }
    snap.components = components < 0 ? 0 : components;
    return snap;
}

namespace {
void check_grid_match(const GridSnapshot& snap, const RefGrid& grid,
                      const std::string& path) {
    if (snap.nx != grid.nx() || snap.ny != grid.ny())
        throw InputError("snapshot grid size mismatch in " + path);
    if (std::abs(snap.h - grid.h()) > 1e-14 * grid.h())
        throw InputError("snapshot spacing mismatch in " + path);
}
}  // namespace

void write_deformation(const std::string& path, const DeformationField& y) {
    const RefGrid& g = y.grid();
    if (!g.square_cells())
        throw InputError("snapshot format requires square cells (hx == hy)");
    GridSnapshot snap;
    snap.nx = g.nx();
    snap.ny = g.ny();
    snap.h = g.h();
    snap.origin = g.origin();
    snap.components = 2;
    snap.values.reserve(2 * y.nodes().size());
    for (const Vec2& p : y.nodes()) {
        snap.values.push_back(p.x);
        snap.values.push_back(p.y);
    }
    write_snapshot(path, snap);
}

DeformationField read_deformation(const std::string& path, const RefGrid& grid) {
    const GridSnapshot snap = read_snapshot(path);
    check_grid_match(snap, grid, path);
    if (snap.components != 2 ||
        snap.values.size() != static_cast<size_t>(2 * grid.num_nodes()))
        throw InputError("deformation snapshot has wrong shape: " + path);
    DeformationField y(grid);
    for (int n = 0; n < grid.num_nodes(); ++n)
        y.nodes()[n] = {snap.values[2 * n], snap.values[2 * n + 1]};
    return y;
}

void write_director(const std::string& path, const DirectorField& z) {
    const RefGrid& g = z.grid();
    if (!g.square_cells())
        throw InputError("snapshot format requires square cells (hx == hy)");
    GridSnapshot snap;
    snap.nx = g.nx();
    snap.ny = g.ny();
    snap.h = g.h();
    snap.origin = g.origin();
    snap.components = 1;
    snap.values = z.angles();
    write_snapshot(path, snap);
}

DirectorField read_director(const std::string& path, const RefGrid& grid) {
    const GridSnapshot snap = read_snapshot(path);
    check_grid_match(snap, grid, path);
    if (snap.components != 1 ||
        snap.values.size() != static_cast<size_t>(grid.num_cells()))
        throw InputError("director snapshot has wrong shape: " + path);
    DirectorField z(grid);
    z.angles() = snap.values;
    return z;
}

}  // namespace melast

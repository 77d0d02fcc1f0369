#pragma once

#include <cstdint>
#include <vector>

#include "melast/euler_grid.hpp"
#include "melast/fields.hpp"

namespace melast {

enum class StraySolver { CG, DST };

struct MaxwellOptions {
    double tol = 1e-12;      // relative residual target of the CG solve
    int max_iter = 20000;
    StraySolver solver = StraySolver::CG;
};

/// chi_{y(Omega)} m on the Eulerian grid: per occupied cell the value
/// m = z / det Dy at the preimage of the cell center, zero elsewhere.
/// Cells with several preimages use the smallest reference cell index and
/// are counted in mult_flagged.
struct RasterizedMagnetization {
    std::vector<Vec2> m;          // per Eulerian cell, zero outside the image
    std::vector<uint8_t> occupied;
    std::vector<int> pre_cell;    // reference cell of the preimage (-1 outside)
    std::vector<Vec2> pre_st;     // local coordinates of the preimage
    int mult_flagged = 0;

    double l2_norm(double cell_area) const;
};

RasterizedMagnetization rasterize_magnetization(const State& state,
                                                const EulerianGrid& eg);

/// Discrete stray-field problem on the box: cell-centered potential with
/// zero-Dirichlet walls, 5-point Laplacian K u = div_h(face-averaged m).
/// E_mag = 1/2 sum |Du|^2 over face gradients.
struct StrayFieldSolution {
    std::vector<double> u;    // mean-zero gauge
    std::vector<Vec2> du;     // cell-centered field Du (Dirichlet gauge)
    double e_mag = 0.0;
    double residual_norm = 0.0;    // ||K u - rhs||_2
    double rhs_norm = 0.0;         // ||rhs||_2
    double m_norm = 0.0;           // discrete L2 norm of m
    int iterations = 0;
};

StrayFieldSolution solve_stray_field(const std::vector<Vec2>& m,
                                     const EulerianGrid& eg,
                                     const MaxwellOptions& opts = {});

/// Accumulates d E_mag / d(y-nodes, theta) into `grad` (packed layout:
/// y-node n at 2n, 2n+1; theta of cell c at 2*num_nodes + c). The gradient
/// with respect to the Eulerian m is -Du * cell_area, chained through the
/// rasterization preimages by implicit differentiation.
void magnetostatic_gradient(const State& state,
                            const RasterizedMagnetization& raster,
                            const StrayFieldSolution& sol, const EulerianGrid& eg,
                            std::vector<double>& grad);

/// Owns the Eulerian grid and solver options; one solve at a time.
class MaxwellContext {
public:
    MaxwellContext(EulerianGrid eg, MaxwellOptions opts = {})
        : eg_(std::move(eg)), opts_(opts) {}

    const EulerianGrid& grid() const { return eg_; }
    const MaxwellOptions& options() const { return opts_; }

    /// Rasterize + solve; returns E_mag and optionally accumulates the
    /// gradient. Outputs are also kept for inspection (last_*).
    double energy(const State& state, std::vector<double>* grad = nullptr);

    const RasterizedMagnetization& last_raster() const { return raster_; }
    const StrayFieldSolution& last_solution() const { return sol_; }

private:
    EulerianGrid eg_;
    MaxwellOptions opts_;
    RasterizedMagnetization raster_;
    StrayFieldSolution sol_;
};

}  // namespace melast

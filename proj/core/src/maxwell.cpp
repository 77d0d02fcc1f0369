#include "melast/maxwell.hpp"

#include <algorithm>
#include <cmath>

#include "melast/bilinear.hpp"
#include "melast/errors.hpp"

#ifdef MELAST_HAVE_FFTW
#include <fftw3.h>
#endif

namespace melast {

double RasterizedMagnetization::l2_norm(double cell_area) const {
    double s = 0.0;
    for (const Vec2& v : m) s += v.norm2();
    return std::sqrt(s * cell_area);
}

RasterizedMagnetization rasterize_magnetization(const State& state,
                                                const EulerianGrid& eg) {
    const DeformationField& y = state.deformation;
    const RefGrid& g = y.grid();

    Vec2 lo, hi;
    y.bounding_box(lo, hi);
    if (lo.x < eg.lo().x || lo.y < eg.lo().y || hi.x > eg.hi().x || hi.y > eg.hi().y)
        throw InputError("rasterize_magnetization: image escapes bounding box "
                         "(padding too small)");

    RasterizedMagnetization r;
    const int n = eg.num_cells();
    r.m.assign(n, Vec2{});
    r.occupied.assign(n, 0);
    r.pre_cell.assign(n, -1);
    r.pre_st.assign(n, Vec2{});
    std::vector<uint8_t> covered_twice(n, 0);

    for (int rc = 0; rc < g.num_cells(); ++rc) {
        bool admissible = true;
        for (const auto& q : g.quad_points())
            if (y.det_at(rc, q.s, q.t) <= 0.0) { admissible = false; break; }
        if (!admissible) continue;

        const BilinearPatch patch(y.cell_corners(rc));
        Vec2 blo, bhi;
        patch.bounding_box(blo, bhi);
        const int i0 = std::max(0, static_cast<int>(std::floor((blo.x - eg.lo().x) / eg.hx() - 0.5)));
        const int i1 = std::min(eg.mx() - 1, static_cast<int>(std::ceil((bhi.x - eg.lo().x) / eg.hx() - 0.5)));
        const int j0 = std::max(0, static_cast<int>(std::floor((blo.y - eg.lo().y) / eg.hy() - 0.5)));
        const int j1 = std::min(eg.my() - 1, static_cast<int>(std::ceil((bhi.y - eg.lo().y) / eg.hy() - 0.5)));
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                const int ec = eg.cell_index(i, j);
                const auto st = patch.invert(eg.cell_center(ec));
                if (!st) continue;
                if (r.occupied[ec]) {
                    covered_twice[ec] = 1;
                    if (rc >= r.pre_cell[ec]) continue;  // keep smallest index
                }
                r.occupied[ec] = 1;
                r.pre_cell[ec] = rc;
                r.pre_st[ec] = *st;
            }
    }
    for (int ec = 0; ec < n; ++ec) {
        if (!r.occupied[ec]) continue;
        const int rc = r.pre_cell[ec];
        const double d = y.det_at(rc, r.pre_st[ec].x, r.pre_st[ec].y);
        r.m[ec] = state.director.director(rc) / d;
        r.mult_flagged += covered_twice[ec];
    }
    return r;
}

namespace {

/// 5-point Laplacian with antisymmetric-reflection ghosts (u = 0 on the box
/// walls). out = K u, per cell.
void apply_laplacian(const EulerianGrid& eg, const std::vector<double>& u,
                     std::vector<double>& out) {
    const int mx = eg.mx(), my = eg.my();
    const double ax = 1.0 / (eg.hx() * eg.hx());
    const double ay = 1.0 / (eg.hy() * eg.hy());
    for (int j = 0; j < my; ++j)
        for (int i = 0; i < mx; ++i) {
            const int c = j * mx + i;
            const double uc = u[c];
            const double uw = i > 0 ? u[c - 1] : -uc;
            const double ue = i < mx - 1 ? u[c + 1] : -uc;
            const double us = j > 0 ? u[c - mx] : -uc;
            const double un = j < my - 1 ? u[c + mx] : -uc;
            out[c] = ax * (2.0 * uc - uw - ue) + ay * (2.0 * uc - us - un);
        }
}

/// rhs = div_h of the face-averaged magnetization (ghost m = 0).
std::vector<double> divergence_rhs(const EulerianGrid& eg, const std::vector<Vec2>& m) {
    const int mx = eg.mx(), my = eg.my();
    std::vector<double> rhs(eg.num_cells());
    for (int j = 0; j < my; ++j)
        for (int i = 0; i < mx; ++i) {
            const int c = j * mx + i;
            const double mw = i > 0 ? 0.5 * (m[c - 1].x + m[c].x) : 0.5 * m[c].x;
            const double me = i < mx - 1 ? 0.5 * (m[c].x + m[c + 1].x) : 0.5 * m[c].x;
            const double ms = j > 0 ? 0.5 * (m[c - mx].y + m[c].y) : 0.5 * m[c].y;
            const double mn = j < my - 1 ? 0.5 * (m[c].y + m[c + mx].y) : 0.5 * m[c].y;
            rhs[c] = (me - mw) / eg.hx() + (mn - ms) / eg.hy();
        }
    return rhs;
}

int conjugate_gradient(const EulerianGrid& eg, const std::vector<double>& rhs,
                       std::vector<double>& u, double tol, int max_iter,
                       double& final_residual) {
    const int n = eg.num_cells();
    std::vector<double> r = rhs, p = rhs, Ap(n);
    std::fill(u.begin(), u.end(), 0.0);
    double rr = 0.0;
    for (double v : r) rr += v * v;
    const double target = tol * std::sqrt(rr);
    if (rr == 0.0) {
        final_residual = 0.0;
        return 0;
    }
    int it = 0;
    for (; it < max_iter; ++it) {
        if (std::sqrt(rr) <= target) break;
        apply_laplacian(eg, p, Ap);
        double pAp = 0.0;
        for (int k = 0; k < n; ++k) pAp += p[k] * Ap[k];
        const double alpha = rr / pAp;
        double rr_new = 0.0;
        for (int k = 0; k < n; ++k) {
            u[k] += alpha * p[k];
            r[k] -= alpha * Ap[k];
            rr_new += r[k] * r[k];
        }
        const double beta = rr_new / rr;
        for (int k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
        rr = rr_new;
    }
    final_residual = std::sqrt(rr);
    return it;
}

#ifdef MELAST_HAVE_FFTW
/// Direct solve by DST-II/DST-III: the reflection-ghost Laplacian is
/// diagonal in the sin(pi k (i+1/2)/m) basis.
void dst_solve(const EulerianGrid& eg, const std::vector<double>& rhs,
               std::vector<double>& u) {
    const int mx = eg.mx(), my = eg.my();
    std::vector<double> work = rhs;
    fftw_plan fwd = fftw_plan_r2r_2d(my, mx, work.data(), work.data(),
                                     FFTW_RODFT10, FFTW_RODFT10, FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);

    const double ax = 1.0 / (eg.hx() * eg.hx());
    const double ay = 1.0 / (eg.hy() * eg.hy());
    const double pi = 3.14159265358979323846;
    for (int j = 0; j < my; ++j) {
        const double ly = ay * (2.0 - 2.0 * std::cos(pi * (j + 1) / my));
        for (int i = 0; i < mx; ++i) {
            const double lx = ax * (2.0 - 2.0 * std::cos(pi * (i + 1) / mx));
            work[j * mx + i] /= (lx + ly);
        }
    }

    fftw_plan bwd = fftw_plan_r2r_2d(my, mx, work.data(), work.data(),
                                     FFTW_RODFT01, FFTW_RODFT01, FFTW_ESTIMATE);
    fftw_execute(bwd);
    fftw_destroy_plan(bwd);

    const double scale = 1.0 / (4.0 * mx * my);
    u.resize(rhs.size());
    for (size_t k = 0; k < rhs.size(); ++k) u[k] = work[k] * scale;
}
#endif

}  // namespace

StrayFieldSolution solve_stray_field(const std::vector<Vec2>& m,
                                     const EulerianGrid& eg,
                                     const MaxwellOptions& opts) {
    if (static_cast<int>(m.size()) != eg.num_cells())
        throw InputError("solve_stray_field: magnetization size mismatch");

    StrayFieldSolution sol;
    const int mx = eg.mx(), my = eg.my();
    const int n = eg.num_cells();
    const std::vector<double> rhs = divergence_rhs(eg, m);

    sol.u.assign(n, 0.0);
    double rhs_norm2 = 0.0;
    for (double v : rhs) rhs_norm2 += v * v;
    sol.rhs_norm = std::sqrt(rhs_norm2);

    double m_norm2 = 0.0;
    for (const Vec2& v : m) m_norm2 += v.norm2();
    sol.m_norm = std::sqrt(m_norm2 * eg.cell_area());

    if (sol.rhs_norm > 0.0) {
        if (opts.solver == StraySolver::DST) {
#ifdef MELAST_HAVE_FFTW
            dst_solve(eg, rhs, sol.u);
            std::vector<double> Ku(n);
            apply_laplacian(eg, sol.u, Ku);
            double res2 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double d = Ku[k] - rhs[k];
                res2 += d * d;
            }
            sol.residual_norm = std::sqrt(res2);
            sol.iterations = 1;
#else
            throw NumericalError("DST solver requested but FFTW is unavailable");
#endif
        } else {
            sol.iterations = conjugate_gradient(eg, rhs, sol.u, opts.tol,
                                                opts.max_iter, sol.residual_norm);
            if (sol.residual_norm > 10.0 * opts.tol * sol.rhs_norm &&
                sol.iterations >= opts.max_iter)
                throw NumericalError(
                    "stray-field CG did not converge: residual " +
                    std::to_string(sol.residual_norm) + " after " +
                    std::to_string(sol.iterations) + " iterations");
        }
    }

    // Field and energy in the Dirichlet gauge (walls at u = 0).
    sol.du.assign(n, Vec2{});
    for (int j = 0; j < my; ++j)
        for (int i = 0; i < mx; ++i) {
            const int c = j * mx + i;
            const double uc = sol.u[c];
            const double uw = i > 0 ? sol.u[c - 1] : -uc;
            const double ue = i < mx - 1 ? sol.u[c + 1] : -uc;
            const double us = j > 0 ? sol.u[c - mx] : -uc;
            const double un = j < my - 1 ? sol.u[c + mx] : -uc;
            sol.du[c] = {(ue - uw) / (2.0 * eg.hx()), (un - us) / (2.0 * eg.hy())};
        }

    double e = 0.0;
    const double vol = eg.cell_area();
    for (int j = 0; j < my; ++j)
        for (int i = 0; i < mx; ++i) {
            const int c = j * mx + i;
            // Each cell owns its west and south faces; east/north walls added
            // at the boundary cells. Wall half-cells carry volume vol/2 with
            // gradient 2u/h.
            const double gw = i > 0 ? (sol.u[c] - sol.u[c - 1]) / eg.hx()
                                    : 2.0 * sol.u[c] / eg.hx();
            const double gs = j > 0 ? (sol.u[c] - sol.u[c - mx]) / eg.hy()
                                    : 2.0 * sol.u[c] / eg.hy();
            const double ww = i > 0 ? vol : 0.5 * vol;
            const double ws = j > 0 ? vol : 0.5 * vol;
            e += 0.5 * (gw * gw * ww + gs * gs * ws);
            if (i == mx - 1) {
                const double ge = 2.0 * sol.u[c] / eg.hx();
                e += 0.25 * ge * ge * vol;
            }
            if (j == my - 1) {
                const double gn = 2.0 * sol.u[c] / eg.hy();
                e += 0.25 * gn * gn * vol;
            }
        }
    sol.e_mag = e;

    // Mean-zero gauge for the reported potential.
    double mean = 0.0;
    for (double v : sol.u) mean += v;
    mean /= n;
    for (double& v : sol.u) v -= mean;
    return sol;
}

void magnetostatic_gradient(const State& state,
                            const RasterizedMagnetization& raster,
                            const StrayFieldSolution& sol, const EulerianGrid& eg,
                            std::vector<double>& grad) {
    const DeformationField& y = state.deformation;
    const RefGrid& g = y.grid();
    const int theta_offset = 2 * g.num_nodes();
    const double cell_area = eg.cell_area();

    for (int ec = 0; ec < eg.num_cells(); ++ec) {
        if (!raster.occupied[ec]) continue;
        const int rc = raster.pre_cell[ec];
        const double s = raster.pre_st[ec].x, t = raster.pre_st[ec].y;
        const double d = y.det_at(rc, s, t);
        const Vec2 z = state.director.director(rc);
        const Vec2 zp = state.director.director_perp(rc);
        const Vec2 gm = sol.du[ec] * (-cell_area);  // dE/dm at this cell

        // theta: m = z(theta)/d.
        grad[theta_offset + rc] += gm.dot(zp) / d;

        // y-nodes: m = z/d(s*,t*;Y) with y(s*,t*;Y) = xi fixed.
        const double w = -gm.dot(z) / (d * d);  // dE/dd
        const Mat2 F = y.gradient(rc, s, t);
        const Mat2 cof = F.cof();
        const Vec2 dets = y.det_grad_st(rc, s, t);
        const Mat2 J{F(0, 0) * g.hx(), F(0, 1) * g.hy(),
                     F(1, 0) * g.hx(), F(1, 1) * g.hy()};
        const Vec2 adj_st = J.inverse().transpose() * dets;  // J^{-T} grad_st d
        const auto ds = shape_ds(s, t);
        const auto dt = shape_dt(s, t);
        const auto N = shape_values(s, t);
        const auto nodes = g.cell_nodes(rc);
        for (int k = 0; k < 4; ++k) {
            // d(det)/dY_k at fixed (s,t) minus the preimage-motion term.
            const Vec2 ddet{cof(0, 0) * ds[k] / g.hx() + cof(0, 1) * dt[k] / g.hy(),
                            cof(1, 0) * ds[k] / g.hx() + cof(1, 1) * dt[k] / g.hy()};
            const Vec2 total = ddet - adj_st * N[k];
            grad[2 * nodes[k]] += w * total.x;
            grad[2 * nodes[k] + 1] += w * total.y;
        }
    }
}

double MaxwellContext::energy(const State& state, std::vector<double>* grad) {
    raster_ = rasterize_magnetization(state, eg_);
    sol_ = solve_stray_field(raster_.m, eg_, opts_);
    if (grad) magnetostatic_gradient(state, raster_, sol_, eg_, *grad);
    return sol_.e_mag;
}

}  // namespace melast

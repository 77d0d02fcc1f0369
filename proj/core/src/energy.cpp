#include "melast/energy.hpp"

#include <algorithm>
#include <cmath>

#include "melast/errors.hpp"
#include "melast/maxwell.hpp"

namespace melast {

void DofLayout::pack(const State& q, std::vector<double>& x) const {
    x.resize(size());
    for (int n = 0; n < num_nodes; ++n) {
        x[2 * n] = q.deformation.nodes()[n].x;
        x[2 * n + 1] = q.deformation.nodes()[n].y;
    }
    for (int c = 0; c < num_cells; ++c) x[2 * num_nodes + c] = q.director.angles()[c];
}

void DofLayout::unpack(const std::vector<double>& x, State& q) const {
    for (int n = 0; n < num_nodes; ++n)
        q.deformation.nodes()[n] = {x[2 * n], x[2 * n + 1]};
    for (int c = 0; c < num_cells; ++c) q.director.angles()[c] = x[2 * num_nodes + c];
}

double elastic_energy(const State& q, const MaterialParams& mp,
                      std::vector<double>* grad) {
    const RefGrid& g = q.grid();
    const DeformationField& y = q.deformation;
    const int theta_offset = 2 * g.num_nodes();
    const double cell_area = g.cell_area();
    const double hx = g.hx(), hy = g.hy();

    double energy = 0.0;
    for (int c = 0; c < g.num_cells(); ++c) {
        const Vec2 z = q.director.director(c);
        const Vec2 zp = q.director.director_perp(c);
        const Mat2 linv = mp.L_inverse(z);
        const Mat2 dlinv = grad ? mp.L_inverse_dtheta(z, zp) : Mat2{};
        const auto nodes = g.cell_nodes(c);
        for (const auto& qp : g.quad_points()) {
            const Mat2 F = y.gradient(c, qp.s, qp.t);
            if (F.det() <= 0.0)
                throw InputError("elastic_energy: det Dy <= 0 at a quadrature point "
                                 "(inadmissible state)");
            const Mat2 Xi = linv * F;
            const double w = qp.w * cell_area;
            energy += w * phi_density(Xi, mp.p, mp.a);
            if (!grad) continue;
            const Mat2 dphi = phi_derivative(Xi, mp.p, mp.a);
            const Mat2 S = linv * dphi;  // dPhi/dF (L^{-1} symmetric)
            const auto ds = shape_ds(qp.s, qp.t);
            const auto dt = shape_dt(qp.s, qp.t);
            for (int k = 0; k < 4; ++k) {
                (*grad)[2 * nodes[k]] += w * (S(0, 0) * ds[k] / hx + S(0, 1) * dt[k] / hy);
                (*grad)[2 * nodes[k] + 1] += w * (S(1, 0) * ds[k] / hx + S(1, 1) * dt[k] / hy);
            }
            (*grad)[theta_offset + c] += w * dphi.ddot(dlinv * F);
        }
    }
    return energy;
}

namespace {

/// Neighbor stencil for the per-cell reference gradient of a cell field:
/// central differences inside, one-sided at the domain boundary.
struct CellStencil {
    int plus, minus;   // cell indices
    double inv_step;   // 1/(2h) central, 1/h one-sided
};

CellStencil x_stencil(const RefGrid& g, int c) {
    const int i = g.cell_i(c), j = g.cell_j(c);
    if (i == 0) return {g.cell_index(1, j), c, 1.0 / g.hx()};
    if (i == g.nx() - 1) return {c, g.cell_index(i - 1, j), 1.0 / g.hx()};
    return {g.cell_index(i + 1, j), g.cell_index(i - 1, j), 0.5 / g.hx()};
}

CellStencil y_stencil(const RefGrid& g, int c) {
    const int i = g.cell_i(c), j = g.cell_j(c);
    if (j == 0) return {g.cell_index(i, 1), c, 1.0 / g.hy()};
    if (j == g.ny() - 1) return {c, g.cell_index(i, j - 1), 1.0 / g.hy()};
    return {g.cell_index(i, j + 1), g.cell_index(i, j - 1), 0.5 / g.hy()};
}

/// d(det Dy)/d(Y_k) contraction at a fixed local point.
Vec2 det_node_derivative(const Mat2& cof, double dsk, double dtk, double hx, double hy) {
    return {cof(0, 0) * dsk / hx + cof(0, 1) * dtk / hy,
            cof(1, 0) * dsk / hx + cof(1, 1) * dtk / hy};
}

}  // namespace

double exchange_energy(const State& q, std::vector<double>* grad) {
    const RefGrid& g = q.grid();
    const DeformationField& y = q.deformation;
    const int nc = g.num_cells();
    const int theta_offset = 2 * g.num_nodes();
    const double cell_area = g.cell_area();
    const double hx = g.hx(), hy = g.hy();

    // Cell-center determinant and composed magnetization v = z / det.
    std::vector<double> det(nc);
    std::vector<Vec2> v(nc);
    for (int c = 0; c < nc; ++c) {
        det[c] = y.det_at(c, 0.5, 0.5);
        if (det[c] <= 0.0)
            throw InputError("exchange_energy: det Dy <= 0 at a cell center");
        v[c] = q.director.director(c) / det[c];
    }

    double energy = 0.0;
    std::vector<Vec2> vbar;       // dE/dv per cell
    std::vector<double> detbar;   // dE/ddet per cell
    std::vector<Mat2> fbar;       // dE/dF per cell (center gradient)
    if (grad) {
        vbar.assign(nc, Vec2{});
        detbar.assign(nc, 0.0);
        fbar.assign(nc, Mat2{});
    }

    for (int c = 0; c < nc; ++c) {
        const CellStencil sx = x_stencil(g, c);
        const CellStencil sy = y_stencil(g, c);
        // Reference gradient G: column j holds d v / d x_j.
        const Vec2 gx = (v[sx.plus] - v[sx.minus]) * sx.inv_step;
        const Vec2 gy = (v[sy.plus] - v[sy.minus]) * sy.inv_step;
        const Mat2 G{gx.x, gy.x, gx.y, gy.y};
        const Mat2 F = y.gradient(c, 0.5, 0.5);
        const Mat2 M = F.inverse();
        const Mat2 P = G * M;  // pulled-back gradient D(m o y) (Dy)^{-1}
        energy += P.frob2() * det[c] * cell_area;
        if (!grad) continue;

        const Mat2 Q = (P * M.transpose()) * (2.0 * det[c] * cell_area);  // dE/dG
        const Mat2 R = (G.transpose() * P) * (2.0 * det[c] * cell_area);  // dE/dM
        detbar[c] += P.frob2() * cell_area;
        // G columns come from the neighbor stencils.
        vbar[sx.plus] += Vec2{Q(0, 0), Q(1, 0)} * sx.inv_step;
        vbar[sx.minus] -= Vec2{Q(0, 0), Q(1, 0)} * sx.inv_step;
        vbar[sy.plus] += Vec2{Q(0, 1), Q(1, 1)} * sy.inv_step;
        vbar[sy.minus] -= Vec2{Q(0, 1), Q(1, 1)} * sy.inv_step;
        // M = F^{-1}: dE/dF = -M^T R M^T.
        const Mat2 mt = M.transpose();
        fbar[c] += (mt * R * mt) * -1.0;
    }

    if (grad) {
        for (int c = 0; c < nc; ++c) {
            // v = z / det: angle and determinant chains.
            (*grad)[theta_offset + c] += vbar[c].dot(q.director.director_perp(c)) / det[c];
            detbar[c] -= vbar[c].dot(q.director.director(c)) / (det[c] * det[c]);
        }
        const auto ds = shape_ds(0.5, 0.5);
        const auto dt = shape_dt(0.5, 0.5);
        for (int c = 0; c < nc; ++c) {
            const auto nodes = g.cell_nodes(c);
            const Mat2 F = y.gradient(c, 0.5, 0.5);
            const Mat2 cof = F.cof();
            for (int k = 0; k < 4; ++k) {
                const Vec2 dd = det_node_derivative(cof, ds[k], dt[k], hx, hy);
                double gxv = detbar[c] * dd.x;
                double gyv = detbar[c] * dd.y;
                gxv += fbar[c](0, 0) * ds[k] / hx + fbar[c](0, 1) * dt[k] / hy;
                gyv += fbar[c](1, 0) * ds[k] / hx + fbar[c](1, 1) * dt[k] / hy;
                (*grad)[2 * nodes[k]] += gxv;
                (*grad)[2 * nodes[k] + 1] += gyv;
            }
        }
    }
    return energy;
}

namespace {

/// Two-point Gauss rule on [0,1].
constexpr double kEdgeQ[2] = {0.21132486540518713, 0.78867513459481287};
constexpr double kEdgeW[2] = {0.5, 0.5};

struct EdgeGeometry {
    Vec2 x0, x1;    // reference endpoints
    int n0, n1;     // node indices
    double length;  // reference length
};

EdgeGeometry edge_geometry(const RefGrid& g, const BoundaryEdge& e) {
    const int nx1 = g.nx() + 1;
    const int i0 = e.n0 % nx1, j0 = e.n0 / nx1;
    const int i1 = e.n1 % nx1, j1 = e.n1 / nx1;
    const Vec2 a = g.node_pos(i0, j0), b = g.node_pos(i1, j1);
    return {a, b, e.n0, e.n1, (b - a).norm()};
}

}  // namespace

double load_work(const State& q, const LoadSchedule& loads, double t,
                 std::vector<double>* grad) {
    const RefGrid& g = q.grid();
    const DeformationField& y = q.deformation;
    const int theta_offset = 2 * g.num_nodes();
    const double cell_area = g.cell_area();
    loads.interval_of(t);  // validates t in [0, T]

    double work = 0.0;

    if (loads.has_body_force()) {
        for (int c = 0; c < g.num_cells(); ++c) {
            const auto nodes = g.cell_nodes(c);
            for (const auto& qp : g.quad_points()) {
                const Vec2 x = g.cell_point(c, qp.s, qp.t);
                const Vec2 fv = loads.body_force(x, t);
                const Vec2 yv = y.value(c, qp.s, qp.t);
                const double w = qp.w * cell_area;
                work += w * fv.dot(yv);
                if (!grad) continue;
                const auto N = shape_values(qp.s, qp.t);
                for (int k = 0; k < 4; ++k) {
                    (*grad)[2 * nodes[k]] += w * fv.x * N[k];
                    (*grad)[2 * nodes[k] + 1] += w * fv.y * N[k];
                }
            }
        }
    }

    if (loads.has_surface_force()) {
        for (const auto& e : g.edges_for_sides(loads.sigma_sides())) {
            const EdgeGeometry eg = edge_geometry(g, e);
            for (int iq = 0; iq < 2; ++iq) {
                const double u = kEdgeQ[iq];
                const double w = kEdgeW[iq] * eg.length;
                const Vec2 x = eg.x0 + (eg.x1 - eg.x0) * u;
                const Vec2 gv = loads.surface_force(x, t);
                const Vec2 yv = y.node(eg.n0) * (1.0 - u) + y.node(eg.n1) * u;
                work += w * gv.dot(yv);
                if (!grad) continue;
                (*grad)[2 * eg.n0] += w * gv.x * (1.0 - u);
                (*grad)[2 * eg.n0 + 1] += w * gv.y * (1.0 - u);
                (*grad)[2 * eg.n1] += w * gv.x * u;
                (*grad)[2 * eg.n1 + 1] += w * gv.y * u;
            }
        }
    }

    if (loads.has_applied_field()) {
        // Zeeman term in reference form: int h(y(x)) . z dx.
        for (int c = 0; c < g.num_cells(); ++c) {
            const Vec2 z = q.director.director(c);
            const Vec2 zp = q.director.director_perp(c);
            const auto nodes = g.cell_nodes(c);
            for (const auto& qp : g.quad_points()) {
                const Vec2 yv = y.value(c, qp.s, qp.t);
                const Vec2 hv = loads.applied_field(yv, t);
                const double w = qp.w * cell_area;
                work += w * hv.dot(z);
                if (!grad) continue;
                const Mat2 dh = loads.applied_field_jacobian(yv, t);
                const Vec2 pull = dh.transpose() * z;
                const auto N = shape_values(qp.s, qp.t);
                for (int k = 0; k < 4; ++k) {
                    (*grad)[2 * nodes[k]] += w * pull.x * N[k];
                    (*grad)[2 * nodes[k] + 1] += w * pull.y * N[k];
                }
                (*grad)[theta_offset + c] += w * hv.dot(zp);
            }
        }
    }
    return work;
}

double boundary_penalty(const State& q, const LoadSchedule& loads, double t,
                        const MaterialParams& mp, std::vector<double>* grad) {
    const RefGrid& g = q.grid();
    const DeformationField& y = q.deformation;
    const double p = mp.p;
    loads.interval_of(t);

    double pen = 0.0;
    for (const auto& e : g.edges_for_sides(loads.gamma_sides())) {
        const EdgeGeometry eg = edge_geometry(g, e);
        for (int iq = 0; iq < 2; ++iq) {
            const double u = kEdgeQ[iq];
            const double w = kEdgeW[iq] * eg.length;
            const Vec2 x = eg.x0 + (eg.x1 - eg.x0) * u;
            const Vec2 dv = loads.boundary_datum(x, t);
            const Vec2 yv = y.node(eg.n0) * (1.0 - u) + y.node(eg.n1) * u;
            const Vec2 diff = dv - yv;
            const double r2 = diff.norm2();
            pen += w * ((p == 2.0) ? r2 : std::pow(r2, 0.5 * p));
            if (!grad || r2 == 0.0) continue;
            // d/dy |d - y|^p = -p |d - y|^{p-2} (d - y).
            const double coeff = (p == 2.0) ? 2.0 : p * std::pow(r2, 0.5 * p - 1.0);
            const Vec2 dpen = diff * (-coeff);
            (*grad)[2 * eg.n0] += w * dpen.x * (1.0 - u);
            (*grad)[2 * eg.n0 + 1] += w * dpen.y * (1.0 - u);
            (*grad)[2 * eg.n1] += w * dpen.x * u;
            (*grad)[2 * eg.n1 + 1] += w * dpen.y * u;
        }
    }
    return pen;
}

EnergyBreakdown total_energy(const State& q, const LoadSchedule& loads, double t,
                             const MaterialParams& mp, MaxwellContext* maxwell,
                             std::vector<double>* grad) {
    EnergyBreakdown b;
    b.e_el = elastic_energy(q, mp, grad);
    b.e_exc = exchange_energy(q, grad);
    if (maxwell) b.e_mag = maxwell->energy(q, grad);

    // -L: accumulate the load-work gradient negated.
    if (grad) {
        std::vector<double> lg(grad->size(), 0.0);
        b.l_work = load_work(q, loads, t, &lg);
        for (size_t k = 0; k < lg.size(); ++k) (*grad)[k] -= lg[k];
    } else {
        b.l_work = load_work(q, loads, t, nullptr);
    }
    b.b_pen = boundary_penalty(q, loads, t, mp, grad);
    b.f_total = b.e_el + b.e_exc + b.e_mag - b.l_work + b.b_pen;
    return b;
}

namespace {

/// d_t F at fixed state using the rates of one schedule interval.
double time_derivative_on_interval(const State& q, const LoadSchedule& loads,
                                   double t, int interval, const MaterialParams& mp) {
    const RefGrid& g = q.grid();
    const DeformationField& y = q.deformation;
    const double cell_area = g.cell_area();
    double result = 0.0;

    if (loads.has_body_force()) {
        for (int c = 0; c < g.num_cells(); ++c)
            for (const auto& qp : g.quad_points()) {
                const Vec2 x = g.cell_point(c, qp.s, qp.t);
                result -= qp.w * cell_area *
                          loads.body_force_rate(x, interval).dot(y.value(c, qp.s, qp.t));
            }
    }
    if (loads.has_surface_force()) {
        for (const auto& e : g.edges_for_sides(loads.sigma_sides())) {
            const EdgeGeometry eg = edge_geometry(g, e);
            for (int iq = 0; iq < 2; ++iq) {
                const double u = kEdgeQ[iq];
                const Vec2 x = eg.x0 + (eg.x1 - eg.x0) * u;
                const Vec2 yv = y.node(eg.n0) * (1.0 - u) + y.node(eg.n1) * u;
                result -= kEdgeW[iq] * eg.length *
                          loads.surface_force_rate(x, interval).dot(yv);
            }
        }
    }
    if (loads.has_applied_field()) {
        for (int c = 0; c < g.num_cells(); ++c) {
            const Vec2 z = q.director.director(c);
            for (const auto& qp : g.quad_points()) {
                const Vec2 yv = y.value(c, qp.s, qp.t);
                result -= qp.w * cell_area *
                          loads.applied_field_rate(yv, interval).dot(z);
            }
        }
    }
    // + d_t B = p int |d - y|^{p-2} (d - y) . dd/dt da.
    const double p = mp.p;
    for (const auto& e : g.edges_for_sides(loads.gamma_sides())) {
        const EdgeGeometry eg = edge_geometry(g, e);
        for (int iq = 0; iq < 2; ++iq) {
            const double u = kEdgeQ[iq];
            const double w = kEdgeW[iq] * eg.length;
            const Vec2 x = eg.x0 + (eg.x1 - eg.x0) * u;
            const Vec2 diff = loads.boundary_datum(x, t) -
                              (y.node(eg.n0) * (1.0 - u) + y.node(eg.n1) * u);
            const Vec2 drate = loads.boundary_datum_rate(x, interval);
            const double r2 = diff.norm2();
            if (r2 == 0.0) continue;
            const double coeff = (p == 2.0) ? p : p * std::pow(r2, 0.5 * p - 1.0);
            result += w * coeff * diff.dot(drate);
        }
    }
    return result;
}

}  // namespace

TimeDerivative time_derivative(const State& q, const LoadSchedule& loads, double t,
                               const MaterialParams& mp) {
    TimeDerivative out;
    out.knot = loads.is_knot(t);
    out.value = time_derivative_on_interval(q, loads, t, loads.interval_of(t), mp);
    return out;
}

double work_integral(const State& q, const LoadSchedule& loads, double t0,
                     double t1, const MaterialParams& mp, int subdivisions) {
    if (!(t0 <= t1)) throw InputError("work_integral: t0 must not exceed t1");
    if (t0 == t1) return 0.0;
    std::vector<double> cuts{t0};
    for (double s : loads.knots_between(t0, t1)) cuts.push_back(s);
    cuts.push_back(t1);

    double total = 0.0;
    for (size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        const double a = cuts[piece], b = cuts[piece + 1];
        const int interval = loads.interval_of(0.5 * (a + b));
        const int n = std::max(2, subdivisions + (subdivisions % 2));  // even
        const double dh = (b - a) / n;
        double sum = time_derivative_on_interval(q, loads, a, interval, mp) +
                     time_derivative_on_interval(q, loads, b, interval, mp);
        for (int k = 1; k < n; ++k) {
            const double tau = a + k * dh;
            sum += (k % 2 ? 4.0 : 2.0) *
                   time_derivative_on_interval(q, loads, tau, interval, mp);
        }
        total += sum * dh / 3.0;
    }
    return total;
}

}  // namespace melast

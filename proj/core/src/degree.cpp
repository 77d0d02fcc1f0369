#include "melast/degree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "melast/bilinear.hpp"
#include "melast/errors.hpp"

namespace melast {

namespace {

double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = ab.norm2();
    if (len2 == 0.0) return (p - a).norm();
    const double u = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * u)).norm();
}

double dist_to_polyline(Vec2 p, const std::vector<Vec2>& poly) {
    double d = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k + 1 < poly.size(); ++k)
        d = std::min(d, dist_point_segment(p, poly[k], poly[k + 1]));
    return d;
}

/// Accumulated signed angle of a closed polyline around xi, in turns.
double winding_turns(const std::vector<Vec2>& poly, Vec2 xi) {
    double total = 0.0;
    for (size_t k = 0; k + 1 < poly.size(); ++k) {
        const Vec2 a = poly[k] - xi;
        const Vec2 b = poly[k + 1] - xi;
        total += std::atan2(a.cross(b), a.dot(b));
    }
    return total / (2.0 * std::numbers::pi);
}

}  // namespace

Subdomain Subdomain::ball(Vec2 center, double radius) {
    Subdomain u;
    u.kind = Kind::Ball;
    u.center = center;
    u.radius = radius;
    return u;
}

Subdomain Subdomain::annulus(Vec2 center, double inner_radius, double outer_radius) {
    if (!(0.0 < inner_radius && inner_radius < outer_radius))
        throw InputError("annulus needs 0 < inner radius < outer radius");
    Subdomain u;
    u.kind = Kind::Annulus;
    u.center = center;
    u.inner_radius = inner_radius;
    u.radius = outer_radius;
    return u;
}

Subdomain Subdomain::rectangle(Vec2 lo, Vec2 hi) {
    if (!(hi.x > lo.x && hi.y > lo.y))
        throw InputError("rectangle subdomain must have positive extent");
    Subdomain u;
    u.kind = Kind::Rectangle;
    u.rect_lo = lo;
    u.rect_hi = hi;
    return u;
}

bool Subdomain::contains(Vec2 x) const {
    switch (kind) {
        case Kind::Rectangle:
            return x.x > rect_lo.x && x.x < rect_hi.x && x.y > rect_lo.y && x.y < rect_hi.y;
        case Kind::Ball:
            return (x - center).norm() < radius;
        case Kind::Annulus: {
            const double r = (x - center).norm();
            return r > inner_radius && r < radius;
        }
    }
    return false;
}

std::vector<std::vector<Vec2>> Subdomain::boundary_polylines(int n) const {
    std::vector<std::vector<Vec2>> out;
    auto circle = [&](double r, bool ccw) {
        std::vector<Vec2> poly;
        poly.reserve(n + 1);
        for (int k = 0; k <= n; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / n * (ccw ? 1.0 : -1.0);
            poly.push_back(center + Vec2{r * std::cos(phi), r * std::sin(phi)});
        }
        return poly;
    };
    switch (kind) {
        case Kind::Rectangle: {
            std::vector<Vec2> poly;
            const int per_side = std::max(1, n / 4);
            auto push_edge = [&](Vec2 a, Vec2 b) {
                for (int k = 0; k < per_side; ++k) {
                    const double u = static_cast<double>(k) / per_side;
                    poly.push_back(a + (b - a) * u);
                }
            };
            const Vec2 bl = rect_lo, br{rect_hi.x, rect_lo.y};
            const Vec2 tr = rect_hi, tl{rect_lo.x, rect_hi.y};
            push_edge(bl, br);
            push_edge(br, tr);
            push_edge(tr, tl);
            push_edge(tl, bl);
            poly.push_back(bl);
            out.push_back(std::move(poly));
            break;
        }
        case Kind::Ball:
            out.push_back(circle(radius, true));
            break;
        case Kind::Annulus:
            out.push_back(circle(radius, true));
            out.push_back(circle(inner_radius, false));
            break;
    }
    return out;
}

bool Subdomain::compactly_contained_in(const RefGrid& grid, double margin) const {
    const Vec2 lo = grid.origin();
    const Vec2 hi = grid.origin() + grid.extent();
    auto inside = [&](Vec2 p) {
        return p.x > lo.x + margin && p.x < hi.x - margin &&
               p.y > lo.y + margin && p.y < hi.y - margin;
    };
    switch (kind) {
        case Kind::Rectangle:
            return inside(rect_lo) && inside(rect_hi);
        case Kind::Ball:
        case Kind::Annulus:
            return inside(center - Vec2{radius, radius}) &&
                   inside(center + Vec2{radius, radius});
    }
    return false;
}

int winding_degree(const std::vector<Vec2>& poly, Vec2 xi, double tol_band) {
    if (poly.size() < 4) throw InputError("winding_degree: polyline too short");
    if ((poly.front() - poly.back()).norm() > 1e-12)
        throw InputError("winding_degree: open polyline (first point must repeat at the end)");
    if (dist_to_polyline(xi, poly) <= tol_band)
        throw InputError("winding_degree: point on or too close to the boundary polyline");
    const double turns = winding_turns(poly, xi);
    const double nearest = std::round(turns);
    if (std::abs(turns - nearest) >= 0.25)
        throw NumericalError("winding_degree: angle accumulation residual " +
                             std::to_string(std::abs(turns - nearest)) +
                             " exceeds 0.25 turns");
    return static_cast<int>(nearest);
}

DegreeField topological_image(const DeformationField& y, const Subdomain& U,
                              const EulerianGrid& eg, int boundary_samples,
                              double tol_band_override) {
    if (!U.compactly_contained_in(y.grid(), 0.0))
        throw InputError("topological_image: U is not compactly contained in the domain");

    // Sample y along each boundary component of U.
    std::vector<std::vector<Vec2>> images;
    for (const auto& ref_poly : U.boundary_polylines(boundary_samples)) {
        std::vector<Vec2> img;
        img.reserve(ref_poly.size());
        const RefGrid& g = y.grid();
        for (const Vec2& x : ref_poly) {
            const int c = g.locate_cell(x);
            const Vec2 o = g.cell_origin(c);
            img.push_back(y.value(c, (x.x - o.x) / g.hx(), (x.y - o.y) / g.hy()));
        }
        img.back() = img.front();  // guard against rounding at the seam
        images.push_back(std::move(img));
    }

    DegreeField f;
    f.grid = &eg;
    f.tol_band = tol_band_override > 0.0 ? tol_band_override : 1.5 * eg.cell_diag();
    f.degree.assign(eg.num_cells(), 0);
    f.band.assign(eg.num_cells(), 0);

    for (int c = 0; c < eg.num_cells(); ++c) {
        const Vec2 xi = eg.cell_center(c);
        double dist = std::numeric_limits<double>::infinity();
        for (const auto& img : images) dist = std::min(dist, dist_to_polyline(xi, img));
        if (dist <= f.tol_band) {
            f.band[c] = 1;
            continue;
        }
        double turns = 0.0;
        for (const auto& img : images) turns += winding_turns(img, xi);
        f.degree[c] = static_cast<int>(std::llround(turns));
    }
    return f;
}

int degree_component_violations(const DegreeField& f) {
    const EulerianGrid& eg = *f.grid;
    std::vector<int> comp(eg.num_cells(), -1);
    std::vector<int> stack;
    int violations = 0;
    int next = 0;
    for (int seed = 0; seed < eg.num_cells(); ++seed) {
        if (f.band[seed] || comp[seed] >= 0) continue;
        const int label = next++;
        const int expected = f.degree[seed];
        comp[seed] = label;
        stack.push_back(seed);
        while (!stack.empty()) {
            const int c = stack.back();
            stack.pop_back();
            if (f.degree[c] != expected) ++violations;
            const int i = eg.cell_i(c), j = eg.cell_j(c);
            const int nbrs[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            for (const auto& n : nbrs) {
                if (n[0] < 0 || n[1] < 0 || n[0] >= eg.mx() || n[1] >= eg.my()) continue;
                const int cn = eg.cell_index(n[0], n[1]);
                if (f.band[cn] || comp[cn] >= 0) continue;
                comp[cn] = label;
                stack.push_back(cn);
            }
        }
    }
    return violations;
}

double MultiplicityField::mask_area() const {
    long count = 0;
    for (int m : multiplicity) count += (m >= 1);
    return static_cast<double>(count) * grid->cell_area();
}

MultiplicityField geometric_image_and_multiplicity(const DeformationField& y,
                                                   const std::vector<int>& A,
                                                   const EulerianGrid& eg) {
    const RefGrid& g = y.grid();
    std::vector<int> cells = A;
    if (cells.empty()) {
        cells.resize(g.num_cells());
        for (int c = 0; c < g.num_cells(); ++c) cells[c] = c;
    }

    MultiplicityField f;
    f.grid = &eg;
    f.multiplicity.assign(eg.num_cells(), 0);

    for (int rc : cells) {
        bool ok = true;
        for (const auto& q : g.quad_points())
            if (y.det_at(rc, q.s, q.t) <= 0.0) { ok = false; break; }
        if (!ok) {
            ++f.skipped_cells;
            continue;
        }
        const BilinearPatch patch(y.cell_corners(rc));
        Vec2 lo, hi;
        patch.bounding_box(lo, hi);
        // Eulerian cells whose center may fall inside the patch bbox.
        const int i0 = std::max(0, static_cast<int>(std::floor((lo.x - eg.lo().x) / eg.hx() - 0.5)));
        const int i1 = std::min(eg.mx() - 1, static_cast<int>(std::ceil((hi.x - eg.lo().x) / eg.hx() - 0.5)));
        const int j0 = std::max(0, static_cast<int>(std::floor((lo.y - eg.lo().y) / eg.hy() - 0.5)));
        const int j1 = std::min(eg.my() - 1, static_cast<int>(std::ceil((hi.y - eg.lo().y) / eg.hy() - 0.5)));
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                const int ec = eg.cell_index(i, j);
                if (patch.contains(eg.cell_center(ec)))
                    ++f.multiplicity[ec];
            }
    }
    return f;
}

DegMultReport verify_deg_eq_mult(const DeformationField& y, const Subdomain& U,
                                 const EulerianGrid& eg, int boundary_samples) {
    const DegreeField deg = topological_image(y, U, eg, boundary_samples);
    const MultiplicityField mult =
        geometric_image_and_multiplicity(y, cells_in_subdomain(y.grid(), U), eg);
    DegMultReport rep;
    for (int c = 0; c < eg.num_cells(); ++c) {
        if (deg.band[c]) {
            ++rep.band_cells;
            continue;
        }
        ++rep.compared_cells;
        rep.max_discrepancy =
            std::max(rep.max_discrepancy, std::abs(deg.degree[c] - mult.multiplicity[c]));
    }
    return rep;
}

ChangeOfVariable change_of_variable(const DeformationField& y,
                                    const std::vector<int>& A,
                                    const std::function<double(Vec2)>& psi,
                                    const EulerianGrid& eg) {
    const RefGrid& g = y.grid();
    std::vector<int> cells = A;
    if (cells.empty()) {
        cells.resize(g.num_cells());
        for (int c = 0; c < g.num_cells(); ++c) cells[c] = c;
    }

    ChangeOfVariable out;
    const double cell_area = g.cell_area();
    for (int rc : cells)
        for (const auto& q : g.quad_points())
            out.lhs += q.w * cell_area * psi(y.value(rc, q.s, q.t)) * y.det_at(rc, q.s, q.t);

    const MultiplicityField mult = geometric_image_and_multiplicity(y, cells, eg);
    for (int c = 0; c < eg.num_cells(); ++c)
        if (mult.multiplicity[c] > 0)
            out.rhs += psi(eg.cell_center(c)) * mult.multiplicity[c] * eg.cell_area();

    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

double ciarlet_necas_residual(const DeformationField& y, const EulerianGrid& eg,
                              const std::vector<int>& A) {
    const RefGrid& g = y.grid();
    std::vector<int> cells = A;
    if (cells.empty()) {
        cells.resize(g.num_cells());
        for (int c = 0; c < g.num_cells(); ++c) cells[c] = c;
    }
    double det_integral = 0.0;
    const double cell_area = g.cell_area();
    for (int rc : cells)
        for (const auto& q : g.quad_points())
            det_integral += q.w * cell_area * y.det_at(rc, q.s, q.t);
    const MultiplicityField mult = geometric_image_and_multiplicity(y, cells, eg);
    return det_integral - mult.mask_area();
}

int nested_images_violations(const DeformationField& y, Vec2 center,
                             double r_inner, double r_mid, double r_outer,
                             const EulerianGrid& eg, int boundary_samples) {
    if (!(r_inner < r_mid && r_mid < r_outer))
        throw InputError("nested_images_violations: radii must increase");
    const DegreeField fi = topological_image(y, Subdomain::ball(center, r_inner), eg, boundary_samples);
    const DegreeField fm = topological_image(y, Subdomain::ball(center, r_mid), eg, boundary_samples);
    const DegreeField fo = topological_image(y, Subdomain::ball(center, r_outer), eg, boundary_samples);
    int violations = 0;
    for (int c = 0; c < eg.num_cells(); ++c) {
        if (fi.band[c] || fm.band[c] || fo.band[c]) continue;
        if (fi.in_image(c) && !fm.in_image(c)) ++violations;
        if (fm.in_image(c) && !fo.in_image(c)) ++violations;
    }
    return violations;
}

std::vector<int> cells_in_subdomain(const RefGrid& grid, const Subdomain& U) {
    std::vector<int> cells;
    for (int c = 0; c < grid.num_cells(); ++c)
        if (U.contains(grid.cell_center(c))) cells.push_back(c);
    return cells;
}

}  // namespace melast

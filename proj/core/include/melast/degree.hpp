#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "melast/euler_grid.hpp"
#include "melast/fields.hpp"

namespace melast {

/// Subdomain U compactly contained in the reference domain: an axis-aligned
/// rectangle, a ball, or an annulus (two concentric circles).
struct Subdomain {
    enum class Kind { Rectangle, Ball, Annulus };
    Kind kind = Kind::Ball;
    Vec2 center;                // Ball/Annulus
    double radius = 0.0;        // Ball/Annulus outer radius
    double inner_radius = 0.0;  // Annulus only
    Vec2 rect_lo, rect_hi;      // Rectangle

    static Subdomain ball(Vec2 center, double radius);
    static Subdomain annulus(Vec2 center, double inner_radius, double outer_radius);
    static Subdomain rectangle(Vec2 lo, Vec2 hi);

    bool contains(Vec2 x) const;
    /// Boundary sampled as one closed polyline per component, each traversed
    /// counterclockwise around the enclosed region (annulus hole clockwise).
    std::vector<std::vector<Vec2>> boundary_polylines(int points_per_component) const;
    /// True if U (with margin) fits strictly inside the grid rectangle.
    bool compactly_contained_in(const RefGrid& grid, double margin) const;
};

/// Winding number of a closed polyline around xi. The polyline must repeat
/// its first point at the end. The accumulated angle must land within 0.25
/// turns of an integer, and xi must stay at distance > tol_band from every
/// segment; otherwise InputError is thrown.
int winding_degree(const std::vector<Vec2>& closed_polyline, Vec2 xi,
                   double tol_band);

/// Per-Eulerian-cell integer degree together with the boundary-band mask.
struct DegreeField {
    const EulerianGrid* grid = nullptr;
    std::vector<int> degree;     // valid off the band
    std::vector<uint8_t> band;   // 1 = cell center within tol_band of y(dU)
    double tol_band = 0.0;

    bool in_image(int c) const { return !band[c] && degree[c] != 0; }
};

/// Degree field of y on U: y is sampled along the boundary of U and the
/// winding number is computed against each Eulerian cell center. Cells whose
/// center lies within tol_band of the sampled polyline are flagged as band
/// (degree there is not meaningful). Default band width: 1.5 cell diagonals.
DegreeField topological_image(const DeformationField& y, const Subdomain& U,
                              const EulerianGrid& eg,
                              int boundary_samples = 512,
                              double tol_band_override = -1.0);

/// Consistency check: the degree must be constant on each connected
/// component of the non-band cells (4-connectivity). Returns the number of
/// violating cells.
int degree_component_violations(const DegreeField& f);

/// Multiplicity field: per Eulerian cell, the number of reference cells of A
/// whose bilinear image contains the cell center. Reference cells with
/// det Dy <= 0 at some quadrature point are skipped and counted in
/// `skipped_cells`.
struct MultiplicityField {
    const EulerianGrid* grid = nullptr;
    std::vector<int> multiplicity;
    int skipped_cells = 0;

    bool in_image(int c) const { return multiplicity[c] >= 1; }
    /// Area of {multiplicity >= 1}.
    double mask_area() const;
};

/// Forward-maps every reference cell of A (all cells when A is empty) and
/// counts covering patches per Eulerian cell center.
MultiplicityField geometric_image_and_multiplicity(
    const DeformationField& y, const std::vector<int>& A, const EulerianGrid& eg);

/// Max |degree - multiplicity| over non-band Eulerian cells, restricted to
/// reference cells inside U for the multiplicity count.
struct DegMultReport {
    int max_discrepancy = 0;
    int compared_cells = 0;
    int band_cells = 0;
};
DegMultReport verify_deg_eq_mult(const DeformationField& y, const Subdomain& U,
                                 const EulerianGrid& eg,
                                 int boundary_samples = 512);

/// Both sides of the change-of-variable formula over the cell subset A:
///   lhs = int_A psi(y) det Dy dx   (reference quadrature)
///   rhs = sum_c psi(xi_c) mult(c) cell_area
struct ChangeOfVariable {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};
ChangeOfVariable change_of_variable(const DeformationField& y,
                                    const std::vector<int>& A,
                                    const std::function<double(Vec2)>& psi,
                                    const EulerianGrid& eg);

/// Ciarlet-Necas residual over the cell subset A (all cells when empty):
///   int_A det Dy dx - measure(im_G(y, A)).
/// Near zero (up to rasterization error) for a.e.-injective maps; positive
/// by roughly the doubly covered area for folding maps.
double ciarlet_necas_residual(const DeformationField& y, const EulerianGrid& eg,
                              const std::vector<int>& A = {});

/// Nested-images diagnostic: for radii r'' < r' < r, checks that the
/// topological image masks are nested up to the boundary band. Returns the
/// number of violating cells.
int nested_images_violations(const DeformationField& y, Vec2 center,
                             double r_inner, double r_mid, double r_outer,
                             const EulerianGrid& eg, int boundary_samples = 512);

/// All reference cell indices whose center lies in the subdomain.
std::vector<int> cells_in_subdomain(const RefGrid& grid, const Subdomain& U);

}  // namespace melast

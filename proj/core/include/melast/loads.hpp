#pragma once

#include <string>
#include <vector>

#include "melast/expr.hpp"
#include "melast/geometry.hpp"
#include "melast/ref_grid.hpp"

namespace melast {

/// Time-sampled applied loads: body force f, surface force g on Sigma,
/// applied field h on the actual space, boundary datum d on Gamma. Each load
/// is given as a closed-form expression in (x1, x2, t); the schedule samples
/// it at the knots and interpolates linearly in time, so every load is
/// piecewise linear (hence absolutely continuous) in time.
class LoadSchedule {
public:
    LoadSchedule(std::vector<double> times, Expr2 f, Expr2 g, Expr2 h, Expr2 d,
                 std::vector<Side> sigma_sides, std::vector<Side> gamma_sides);

    /// Constant-in-time zero loads with identity boundary datum on all sides.
    static LoadSchedule zero_with_identity_datum(double t_end, int samples = 2);

    double t_end() const { return times_.back(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<Side>& sigma_sides() const { return sigma_sides_; }
    const std::vector<Side>& gamma_sides() const { return gamma_sides_; }

    bool has_body_force() const { return !f_.is_zero(); }
    bool has_surface_force() const { return !g_.is_zero() && !sigma_sides_.empty(); }
    bool has_applied_field() const { return !h_.is_zero(); }

    /// Schedule interval containing t (right-continuous; the last interval
    /// at t = T). Throws InputError outside [0, T].
    int interval_of(double t) const;
    bool is_knot(double t) const;
    /// Knots strictly inside (t0, t1).
    std::vector<double> knots_between(double t0, double t1) const;

    // Piecewise-linear-in-time values.
    Vec2 body_force(Vec2 x, double t) const { return interp(f_, x, t); }
    Vec2 surface_force(Vec2 x, double t) const { return interp(g_, x, t); }
    Vec2 applied_field(Vec2 xi, double t) const { return interp(h_, xi, t); }
    Vec2 boundary_datum(Vec2 x, double t) const { return interp(d_, x, t); }
    /// Spatial Jacobian of the applied field at time t.
    Mat2 applied_field_jacobian(Vec2 xi, double t) const;

    // Per-interval time rates (constant on each schedule interval).
    Vec2 body_force_rate(Vec2 x, int interval) const { return rate(f_, x, interval); }
    Vec2 surface_force_rate(Vec2 x, int interval) const { return rate(g_, x, interval); }
    Vec2 applied_field_rate(Vec2 xi, int interval) const { return rate(h_, xi, interval); }
    Vec2 boundary_datum_rate(Vec2 x, int interval) const { return rate(d_, x, interval); }

    /// Discrete L^2-style norms of the load rates on one interval, used to
    /// assemble the Gronwall weight eta(t). Sampled on the given grid.
    struct RateNorms {
        double f = 0.0, g = 0.0, h = 0.0, d = 0.0;
        double sum() const { return f + g + h + d; }
    };
    RateNorms rate_norms(const RefGrid& grid, int interval) const;

private:
    Vec2 interp(const Expr2& e, Vec2 x, double t) const;
    Vec2 rate(const Expr2& e, Vec2 x, int interval) const;

    std::vector<double> times_;
    Expr2 f_, g_, h_, d_;
    Expr2 dh_dx1_, dh_dx2_;  // cached spatial partials of h
    std::vector<Side> sigma_sides_, gamma_sides_;
};

std::vector<Side> sides_from_names(const std::string& csv);

}  // namespace melast

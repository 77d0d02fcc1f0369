#include "melast/loads.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "melast/errors.hpp"

namespace melast {

LoadSchedule::LoadSchedule(std::vector<double> times, Expr2 f, Expr2 g, Expr2 h,
                           Expr2 d, std::vector<Side> sigma_sides,
                           std::vector<Side> gamma_sides)
    : times_(std::move(times)),
      f_(std::move(f)),
      g_(std::move(g)),
      h_(std::move(h)),
      d_(std::move(d)),
      sigma_sides_(std::move(sigma_sides)),
      gamma_sides_(std::move(gamma_sides)) {
    if (times_.size() < 2) throw ConfigError("load schedule needs at least 2 sample times");
    if (times_.front() != 0.0) throw ConfigError("load schedule must start at t = 0");
    for (size_t k = 0; k + 1 < times_.size(); ++k)
        if (!(times_[k] < times_[k + 1]))
            throw ConfigError("load schedule times must be strictly increasing");
    dh_dx1_ = {h_.x.diff(0), h_.y.diff(0)};
    dh_dx2_ = {h_.x.diff(1), h_.y.diff(1)};
}

LoadSchedule LoadSchedule::zero_with_identity_datum(double t_end, int samples) {
    std::vector<double> times(samples);
    for (int k = 0; k < samples; ++k) times[k] = t_end * k / (samples - 1);
    return LoadSchedule(std::move(times), Expr2::zero(), Expr2::zero(), Expr2::zero(),
                        Expr2::parse("x1", "x2"), {},
                        {Side::Bottom, Side::Right, Side::Top, Side::Left});
}

int LoadSchedule::interval_of(double t) const {
    const double T = times_.back();
    const double eps = 1e-12 * std::max(1.0, T);
    if (t < -eps || t > T + eps)
        throw InputError("time " + std::to_string(t) + " outside the schedule [0, " +
                         std::to_string(T) + "]");
    if (t >= T) return static_cast<int>(times_.size()) - 2;
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    int k = static_cast<int>(it - times_.begin()) - 1;
    return std::clamp(k, 0, static_cast<int>(times_.size()) - 2);
}

bool LoadSchedule::is_knot(double t) const {
    const double eps = 1e-12 * std::max(1.0, times_.back());
    for (double s : times_)
        if (std::abs(t - s) <= eps) return true;
    return false;
}

std::vector<double> LoadSchedule::knots_between(double t0, double t1) const {
    std::vector<double> out;
    for (double s : times_)
        if (s > t0 && s < t1) out.push_back(s);
    return out;
}

Vec2 LoadSchedule::interp(const Expr2& e, Vec2 x, double t) const {
    const int k = interval_of(t);
    const double t0 = times_[k], t1 = times_[k + 1];
    const double w = (t - t0) / (t1 - t0);
    return e.eval(x, t0) * (1.0 - w) + e.eval(x, t1) * w;
}

Vec2 LoadSchedule::rate(const Expr2& e, Vec2 x, int interval) const {
    const double t0 = times_[interval], t1 = times_[interval + 1];
    return (e.eval(x, t1) - e.eval(x, t0)) / (t1 - t0);
}

Mat2 LoadSchedule::applied_field_jacobian(Vec2 xi, double t) const {
    const int k = interval_of(t);
    const double t0 = times_[k], t1 = times_[k + 1];
    const double w = (t - t0) / (t1 - t0);
    const Vec2 c1 = dh_dx1_.eval(xi, t0) * (1.0 - w) + dh_dx1_.eval(xi, t1) * w;
    const Vec2 c2 = dh_dx2_.eval(xi, t0) * (1.0 - w) + dh_dx2_.eval(xi, t1) * w;
    return {c1.x, c2.x, c1.y, c2.y};
}

LoadSchedule::RateNorms LoadSchedule::rate_norms(const RefGrid& grid,
                                                 int interval) const {
    RateNorms n;
    double f2 = 0.0, h2 = 0.0;
    for (int c = 0; c < grid.num_cells(); ++c) {
        const Vec2 x = grid.cell_center(c);
        f2 += body_force_rate(x, interval).norm2() * grid.cell_area();
        h2 += applied_field_rate(x, interval).norm2() * grid.cell_area();
    }
    n.f = std::sqrt(f2);
    n.h = std::sqrt(h2);
    double g2 = 0.0, d2 = 0.0;
    auto edge_mid = [&](const BoundaryEdge& e) {
        const int i0 = e.n0 % (grid.nx() + 1), j0 = e.n0 / (grid.nx() + 1);
        const int i1 = e.n1 % (grid.nx() + 1), j1 = e.n1 / (grid.nx() + 1);
        return (grid.node_pos(i0, j0) + grid.node_pos(i1, j1)) * 0.5;
    };
    auto edge_len = [&](const BoundaryEdge& e) {
        return (e.side == Side::Bottom || e.side == Side::Top) ? grid.hx() : grid.hy();
    };
    for (const auto& e : grid.edges_for_sides(sigma_sides_))
        g2 += surface_force_rate(edge_mid(e), interval).norm2() * edge_len(e);
    for (const auto& e : grid.edges_for_sides(gamma_sides_))
        d2 += boundary_datum_rate(edge_mid(e), interval).norm2() * edge_len(e);
    n.g = std::sqrt(g2);
    n.d = std::sqrt(d2);
    return n;
}

std::vector<Side> sides_from_names(const std::string& csv) {
    std::vector<Side> sides;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
        if (tok.empty()) continue;
        if (tok == "bottom") sides.push_back(Side::Bottom);
        else if (tok == "right") sides.push_back(Side::Right);
        else if (tok == "top") sides.push_back(Side::Top);
        else if (tok == "left") sides.push_back(Side::Left);
        else if (tok == "all") {
            sides = {Side::Bottom, Side::Right, Side::Top, Side::Left};
            return sides;
        } else if (tok == "none") {
            return {};
        } else {
            throw ConfigError("unknown boundary side '" + tok +
                              "' (use bottom,right,top,left,all,none)");
        }
    }
    return sides;
}

}  // namespace melast

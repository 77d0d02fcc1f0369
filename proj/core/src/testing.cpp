#include "melast/testing.hpp"

#include <algorithm>
#include <cmath>

namespace melast {

double uniform01(std::uint64_t& state) {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return static_cast<double>((state * 0x2545F4914F6CDD1DULL) >> 11) * 0x1.0p-53;
}

DeformationField random_admissible_field(const RefGrid& grid, std::uint64_t& rng,
                                         double amplitude) {
    const double pi = 3.14159265358979323846;
    for (int attempt = 0; attempt < 40; ++attempt) {
        // Small affine part plus smooth modes; the image boundary stays a
        // generic curve (no alignment with coordinate lines).
        const double a1 = amplitude * (2.0 * uniform01(rng) - 1.0);
        const double a2 = amplitude * (2.0 * uniform01(rng) - 1.0);
        const double b1 = amplitude * (2.0 * uniform01(rng) - 1.0);
        const double b2 = amplitude * (2.0 * uniform01(rng) - 1.0);
        const double p1 = uniform(rng, 0.0, 2.0 * pi);
        const double p2 = uniform(rng, 0.0, 2.0 * pi);
        const int k1 = 1 + static_cast<int>(uniform01(rng) * 2.0);
        const int k2 = 1 + static_cast<int>(uniform01(rng) * 2.0);
        const Mat2 A{1.0 + 0.3 * amplitude * (2.0 * uniform01(rng) - 1.0),
                     0.3 * amplitude * (2.0 * uniform01(rng) - 1.0),
                     0.3 * amplitude * (2.0 * uniform01(rng) - 1.0),
                     1.0 + 0.3 * amplitude * (2.0 * uniform01(rng) - 1.0)};
        const Vec2 shift{0.1 * amplitude * (2.0 * uniform01(rng) - 1.0),
                         0.1 * amplitude * (2.0 * uniform01(rng) - 1.0)};
        DeformationField y = DeformationField::interpolate(grid, [&](Vec2 x) {
            const double sx = (x.x - grid.origin().x) / grid.extent().x;
            const double sy = (x.y - grid.origin().y) / grid.extent().y;
            const Vec2 wiggle{a1 * std::sin(pi * k1 * sx + p1) * std::sin(pi * sy + p2) +
                                  b1 * sx * sx * (1.0 - sx),
                              a2 * std::sin(pi * k2 * sy + p2) * std::sin(pi * sx + p1) +
                                  b2 * sy * sy * (1.0 - sy)};
            return A * x + shift + wiggle;
        });
        if (y.min_det_at_quadrature() > 0.05) return y;
        amplitude *= 0.6;
    }
    return DeformationField::identity(grid);
}

State random_state(const RefGrid& grid, std::uint64_t& rng, double amp_y,
                   double amp_theta) {
    DeformationField y = random_admissible_field(grid, rng, amp_y);
    const double pi = 3.14159265358979323846;
    const double c0 = uniform(rng, -pi, pi);
    const double c1 = amp_theta * uniform(rng, -1.0, 1.0);
    const double c2 = amp_theta * uniform(rng, -1.0, 1.0);
    const double k1 = 1.0 + std::floor(uniform(rng, 0.0, 2.0));
    const double k2 = 1.0 + std::floor(uniform(rng, 0.0, 2.0));
    DirectorField z = DirectorField::interpolate(grid, [&](Vec2 x) {
        return c0 + c1 * std::sin(pi * k1 * x.x) + c2 * std::cos(pi * k2 * x.y);
    });
    return {std::move(y), std::move(z)};
}

Vec2 angle_double(Vec2 x, Vec2 center) {
    const Vec2 d = x - center;
    const double r = d.norm();
    if (r == 0.0) return center;
    const double phi = std::atan2(d.y, d.x);
    return center + Vec2{r * std::cos(2.0 * phi), r * std::sin(2.0 * phi)};
}

double max_relative_fd_error(const std::function<double(const std::vector<double>&)>& value_of,
                             const std::vector<double>& x,
                             const std::vector<double>& analytic_grad,
                             const std::vector<int>& dofs, double step,
                             double floor) {
    std::vector<int> idx = dofs;
    if (idx.empty()) {
        idx.resize(x.size());
        for (size_t k = 0; k < x.size(); ++k) idx[k] = static_cast<int>(k);
    }
    std::vector<double> xp = x;
    double worst = 0.0;
    for (int k : idx) {
        xp[k] = x[k] + step;
        const double fp = value_of(xp);
        xp[k] = x[k] - step;
        const double fm = value_of(xp);
        xp[k] = x[k];
        const double fd = (fp - fm) / (2.0 * step);
        const double denom = std::max({std::abs(fd), std::abs(analytic_grad[k]), floor});
        worst = std::max(worst, std::abs(fd - analytic_grad[k]) / denom);
    }
    return worst;
}

}  // namespace melast

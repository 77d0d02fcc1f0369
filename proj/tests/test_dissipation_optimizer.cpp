#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "melast/dissipation.hpp"
#include "melast/errors.hpp"
#include "melast/optimizer.hpp"
#include "melast/testing.hpp"

using namespace melast;

TEST_CASE("dissipation hand values") {
    RefGrid g(8, 8, {0, 0}, {1, 1});
    const State q1(DeformationField::identity(g), DirectorField(g, 0.0));  // z = e1

    SUBCASE("identical states dissipate nothing") {
        const Dissipation d = dissipation(q1, q1, 1e-4);
        CHECK(d.exact == 0.0);
        CHECK(d.smoothed == doctest::Approx(0.0));
    }
    SUBCASE("antipodal director: |e1 - (-e1)| = 2") {
        const State q2(DeformationField::identity(g),
                       DirectorField(g, 3.14159265358979323846));
        CHECK(dissipation(q1, q2, 1e-4).exact == doctest::Approx(2.0).epsilon(1e-13));
    }
    SUBCASE("quarter turn: |e1 - e2| = sqrt(2)") {
        const State q2(DeformationField::identity(g),
                       DirectorField(g, 0.5 * 3.14159265358979323846));
        CHECK(dissipation(q1, q2, 1e-4).exact ==
              doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
    }
    SUBCASE("grid mismatch") {
        RefGrid other(4, 4, {0, 0}, {1, 1});
        const State q2 = State::reference(other);
        CHECK_THROWS_AS(dissipation(q1, q2, 1e-4), InputError);
    }
}

TEST_CASE("dissipation is a pseudo-distance") {
    RefGrid g(6, 6, {0, 0}, {1, 1});
    std::uint64_t rng = 404;
    for (int trial = 0; trial < 50; ++trial) {
        const State a = random_state(g, rng, 0.05, 3.0);
        const State b = random_state(g, rng, 0.05, 3.0);
        const State c = random_state(g, rng, 0.05, 3.0);
        const double dab = dissipation(a, b, 1e-4).exact;
        const double dba = dissipation(b, a, 1e-4).exact;
        const double dac = dissipation(a, c, 1e-4).exact;
        const double dcb = dissipation(c, b, 1e-4).exact;
        CHECK(dab == doctest::Approx(dba).epsilon(1e-14));
        CHECK(dab <= dac + dcb + 1e-13);
        CHECK(dissipation(a, a, 1e-4).exact == 0.0);
        // The smoothing never exceeds the exact value.
        const Dissipation d = dissipation(a, b, 1e-3);
        CHECK(d.smoothed <= d.exact + 1e-15);
    }
}

TEST_CASE("smoothed dissipation gradient matches finite differences") {
    RefGrid g(5, 5, {0, 0}, {1, 1});
    std::uint64_t rng = 17;
    const State prev = random_state(g, rng, 0.0, 2.0);
    State q = random_state(g, rng, 0.0, 2.0);
    const double eps_d = 1e-3;

    std::vector<double> grad(2 * g.num_nodes() + g.num_cells(), 0.0);
    dissipation_smoothed_grad(prev.director, q, eps_d, &grad);
    for (int c = 0; c < g.num_cells(); ++c) {
        const double h = 1e-7;
        const double base = q.director.angles()[c];
        q.director.angles()[c] = base + h;
        const double fp = dissipation_smoothed_grad(prev.director, q, eps_d, nullptr);
        q.director.angles()[c] = base - h;
        const double fm = dissipation_smoothed_grad(prev.director, q, eps_d, nullptr);
        q.director.angles()[c] = base;
        CHECK(grad[2 * g.num_nodes() + c] ==
              doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("L-BFGS minimizes a quadratic to machine gradient") {
    const int n = 40;
    std::vector<double> diag(n);
    for (int k = 0; k < n; ++k) diag[k] = 1.0 + k * 0.5;
    auto objective = [&](const std::vector<double>& x, std::vector<double>* grad) {
        double f = 0.0;
        for (int k = 0; k < n; ++k) {
            const double d = x[k] - 1.0;
            f += 0.5 * diag[k] * d * d;
            if (grad) (*grad)[k] += diag[k] * d;
        }
        return f;
    };
    std::vector<double> x(n, 5.0);
    MinimizeOptions opts;
    opts.grad_tol = 1e-10;
    opts.max_iters = 200;
    const MinimizeReport rep = minimize_lbfgs(objective, x, opts);
    CHECK(rep.converged);
    for (int k = 0; k < n; ++k) CHECK(x[k] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("L-BFGS on a nonconvex valley") {
    // Two-dimensional Rosenbrock; checks line search robustness.
    auto objective = [](const std::vector<double>& x, std::vector<double>* grad) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        if (grad) {
            (*grad)[0] += -2.0 * a - 400.0 * x[0] * b;
            (*grad)[1] += 200.0 * b;
        }
        return a * a + 100.0 * b * b;
    };
    std::vector<double> x{-1.2, 1.0};
    MinimizeOptions opts;
    opts.grad_tol = 1e-8;
    opts.max_iters = 500;
    const MinimizeReport rep = minimize_lbfgs(objective, x, opts);
    CHECK(rep.converged);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("L-BFGS respects infeasible regions and the accept hook") {
    // Minimize (x-3)^2 but mark x > 1.5 infeasible: the line search must
    // stop at the barrier and stagnate rather than cross it.
    auto objective = [](const std::vector<double>& x, std::vector<double>* grad) {
        if (x[0] > 1.5) return std::numeric_limits<double>::infinity();
        if (grad) (*grad)[0] += 2.0 * (x[0] - 3.0);
        const double d = x[0] - 3.0;
        return d * d;
    };
    std::vector<double> x{0.0};
    MinimizeOptions opts;
    opts.grad_tol = 1e-12;
    const MinimizeReport rep = minimize_lbfgs(objective, x, opts);
    CHECK(x[0] <= 1.5);
    CHECK(x[0] >= 1.3);
    CHECK(rep.stagnated);

    // Accept hook vetoing everything keeps the (non-stationary) start point.
    std::vector<double> y{2.0};
    const MinimizeReport rep2 = minimize_lbfgs(
        [](const std::vector<double>& v, std::vector<double>* grad) {
            if (grad) (*grad)[0] += 2.0 * v[0];
            return v[0] * v[0] + 1.0;
        },
        y, opts, [](const std::vector<double>&) { return false; });
    CHECK(y[0] == 2.0);
    CHECK(rep2.stagnated);
}

TEST_CASE("optimizer determinism") {
    auto objective = [](const std::vector<double>& x, std::vector<double>* grad) {
        double f = 0.0;
        for (size_t k = 0; k < x.size(); ++k) {
            f += std::cos(x[k]) + 0.1 * x[k] * x[k];
            if (grad) (*grad)[k] += -std::sin(x[k]) + 0.2 * x[k];
        }
        return f;
    };
    std::vector<double> a(10, 2.0), b(10, 2.0);
    MinimizeOptions opts;
    minimize_lbfgs(objective, a, opts);
    minimize_lbfgs(objective, b, opts);
    for (int k = 0; k < 10; ++k) CHECK(a[k] == b[k]);  // bit-exact
}

TEST_CASE("block sweep makes progress on a coupled problem") {
    auto objective = [](const std::vector<double>& x, std::vector<double>* grad) {
        // Ill-scaled coupling between the two halves.
        double f = 0.0;
        const size_t n = x.size() / 2;
        for (size_t k = 0; k < n; ++k) {
            const double u = x[k], v = x[n + k];
            f += 0.5 * (u - 2.0) * (u - 2.0) + 50.0 * (v + u * 0.1) * (v + u * 0.1);
            if (grad) {
                (*grad)[k] += (u - 2.0) + 10.0 * (v + 0.1 * u);
                (*grad)[n + k] += 100.0 * (v + 0.1 * u);
            }
        }
        return f;
    };
    std::vector<double> x(8, 1.0);
    std::vector<int> first{0, 1, 2, 3}, second{4, 5, 6, 7};
    MinimizeOptions opts;
    opts.grad_tol = 1e-9;
    // Alternating sweeps converge geometrically in the coupling strength.
    const MinimizeReport rep =
        minimize_block_sweep(objective, x, {first, second}, 14, opts);
    CHECK(rep.value <= 1e-4);
}

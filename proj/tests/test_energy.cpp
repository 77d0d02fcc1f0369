#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "melast/energy.hpp"
#include "melast/errors.hpp"
#include "melast/testing.hpp"

using namespace melast;

namespace {

MaterialParams unit_params(double p = 2.0, double a = 1.0) {
    MaterialParams mp;
    mp.alpha = mp.beta = 1.0;
    mp.p = p;
    mp.a = a;
    return mp;
}

LoadSchedule make_loads(const std::string& hx, const std::string& hy,
                        const std::string& dx = "x1", const std::string& dy = "x2",
                        double t_end = 1.0) {
    return LoadSchedule({0.0, 0.5 * t_end, t_end}, Expr2::zero(), Expr2::zero(),
                        Expr2::parse(hx, hy), Expr2::parse(dx, dy), {},
                        {Side::Bottom, Side::Right, Side::Top, Side::Left});
}

}  // namespace

TEST_CASE("elastic energy hand values") {
    RefGrid g(8, 8, {0, 0}, {1, 1});

    // Phi(I) = |I|^2 + 1/det = 2 + 1 = 3 on the unit square.
    const State id = State::reference(g);
    CHECK(elastic_energy(id, unit_params()) == doctest::Approx(3.0).epsilon(1e-14));

    // z = e1, alpha = 4: Xi = diag(1/4, 1), Phi = 17/16 + 4 = 81/16.
    MaterialParams aniso = unit_params();
    aniso.alpha = 4.0;
    CHECK(elastic_energy(id, aniso) == doctest::Approx(81.0 / 16.0).epsilon(1e-14));

    // y = 2x: Xi = 2I, Phi = 8 + 1/4; the L-argument stays the unit director.
    State dil(DeformationField::interpolate(g, [](Vec2 x) { return x * 2.0; }),
              DirectorField(g));
    CHECK(elastic_energy(dil, unit_params()) == doctest::Approx(8.25).epsilon(1e-14));

    // Inadmissible state: flipped cell.
    State bad = id;
    bad.deformation.nodes()[g.node_index(4, 4)] = Vec2{-0.5, -0.5};
    CHECK_THROWS_AS(elastic_energy(bad, unit_params()), InputError);
}

TEST_CASE("elastic frame indifference") {
    RefGrid g(6, 6, {0, 0}, {1, 1});
    std::uint64_t rng = 21;
    MaterialParams mp;
    mp.alpha = 2.0;
    mp.beta = 0.7;
    for (int trial = 0; trial < 10; ++trial) {
        const State q = random_state(g, rng, 0.1, 1.5);
        const double base = elastic_energy(q, mp);
        const double phi = uniform(rng, -3.0, 3.0);
        const Mat2 R = Mat2::rotation(phi);
        State rq = q;
        for (auto& node : rq.deformation.nodes()) node = R * node;
        for (auto& ang : rq.director.angles()) ang += phi;
        CHECK(elastic_energy(rq, mp) ==
              doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("exchange energy") {
    SUBCASE("constant director with identity map has zero exchange") {
        RefGrid g(16, 16, {0, 0}, {1, 1});
        State q(DeformationField::identity(g), DirectorField(g, 0.7));
        CHECK(exchange_energy(q) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("helical director z = (cos kx1, sin kx1) gives k^2 at slope 2") {
        const double k = 3.0;
        double prev_err = 1e9;
        std::vector<double> errs;
        for (int n : {16, 32, 64}) {
            RefGrid g(n, n, {0, 0}, {1, 1});
            State q(DeformationField::identity(g),
                    DirectorField::interpolate(g, [&](Vec2 x) { return k * x.x; }));
            const double e = exchange_energy(q);
            errs.push_back(std::abs(e - k * k));
            CHECK(errs.back() < prev_err);
            prev_err = errs.back();
        }
        const double slope = std::log2(errs[0] / errs[2]) / 2.0;
        CHECK(slope >= 1.9);
    }
    SUBCASE("translation invariance") {
        RefGrid g(12, 12, {0, 0}, {1, 1});
        std::uint64_t rng = 5;
        const State q = random_state(g, rng, 0.0, 2.0);
        State shifted = q;
        for (auto& node : shifted.deformation.nodes()) node += Vec2{3.0, -1.5};
        CHECK(exchange_energy(shifted) == doctest::Approx(exchange_energy(q)).epsilon(1e-14));
    }
}

TEST_CASE("load work") {
    RefGrid g(10, 10, {0, 0}, {1, 1});
    const State id = State::reference(g);

    SUBCASE("all loads zero") {
        const LoadSchedule zero = LoadSchedule::zero_with_identity_datum(1.0);
        CHECK(load_work(id, zero, 0.5) == doctest::Approx(0.0));
    }
    SUBCASE("constant field on aligned director gives the domain area") {
        const LoadSchedule loads = make_loads("1", "0");
        std::uint64_t rng = 9;
        State q(random_admissible_field(g, rng, 0.1), DirectorField(g, 0.0));
        CHECK(load_work(q, loads, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("body force f = e2 against the identity gives 1/2") {
        const LoadSchedule loads(
            {0.0, 1.0}, Expr2::parse("0", "1"), Expr2::zero(), Expr2::zero(),
            Expr2::parse("x1", "x2"), {}, {Side::Bottom});
        CHECK(load_work(id, loads, 0.3) == doctest::Approx(0.5).epsilon(1e-13));
    }
    SUBCASE("time outside the schedule") {
        const LoadSchedule loads = make_loads("1", "0");
        CHECK_THROWS_AS(load_work(id, loads, 2.0), InputError);
    }
}

TEST_CASE("boundary penalty") {
    RefGrid g(10, 10, {0, 0}, {1, 1});
    const State id = State::reference(g);

    SUBCASE("y = d gives zero") {
        const LoadSchedule loads = make_loads("0", "0");
        CHECK(boundary_penalty(id, loads, 0.5, unit_params()) == doctest::Approx(0.0));
    }
    SUBCASE("uniform shift delta in e1: delta^p times |Gamma|") {
        const double delta = 0.37;
        const LoadSchedule loads =
            make_loads("0", "0", "x1 + 0.37", "x2");
        const double p2 = boundary_penalty(id, loads, 0.5, unit_params(2.0, 2.0));
        CHECK(p2 == doctest::Approx(delta * delta * 4.0).epsilon(1e-13));
        const double p4 = boundary_penalty(id, loads, 0.5, unit_params(4.0, 2.0));
        CHECK(p4 == doctest::Approx(std::pow(delta, 4.0) * 4.0).epsilon(1e-13));
    }
}

TEST_CASE("total energy breakdown and linearity in loads") {
    RefGrid g(8, 8, {0, 0}, {1, 1});
    std::uint64_t rng = 33;
    const State q = random_state(g, rng, 0.08, 1.0);
    const MaterialParams mp = unit_params(2.0, 2.0);

    const LoadSchedule l1 = make_loads("t", "0");
    const LoadSchedule l2 = make_loads("2*t", "0");

    const EnergyBreakdown b1 = total_energy(q, l1, 1.0, mp, nullptr);
    const EnergyBreakdown b2 = total_energy(q, l2, 1.0, mp, nullptr);
    CHECK(b1.f_total == b1.e_el + b1.e_exc + b1.e_mag - b1.l_work + b1.b_pen);
    // Doubling h doubles only the load work.
    CHECK(b2.l_work == doctest::Approx(2.0 * b1.l_work).epsilon(1e-13));
    CHECK(b2.e_el == b1.e_el);
    CHECK(b2.f_total - b1.f_total == doctest::Approx(-b1.l_work).epsilon(1e-12));
}

TEST_CASE("analytic gradients match finite differences") {
    RefGrid g(6, 6, {0, 0}, {1, 1});
    const DofLayout layout(g);
    std::uint64_t rng = 1001;
    const MaterialParams mp = [&] {
        MaterialParams m;
        m.alpha = 1.8;
        m.beta = 0.6;
        m.p = 2.0;
        m.a = 2.0;
        return m;
    }();
    const LoadSchedule loads(
        {0.0, 1.0}, Expr2::parse("0.4*x2", "0.1"), Expr2::parse("0.2", "0.1*t"),
        Expr2::parse("t*(1+0.5*sin(x1))", "0.3*cos(2*x2)"),
        Expr2::parse("x1 + 0.05*t", "x2 - 0.02*t"), {Side::Top},
        {Side::Bottom, Side::Right, Side::Top, Side::Left});

    for (int trial = 0; trial < 8; ++trial) {
        State q = random_state(g, rng, 0.06, 1.0);
        std::vector<double> x;
        layout.pack(q, x);
        std::vector<int> dofs;
        for (int k = 0; k < 12; ++k)
            dofs.push_back(static_cast<int>(uniform01(rng) * layout.size()) % layout.size());
        State work = q;

        auto verify = [&](auto&& fn, const char* name) {
            std::vector<double> grad(layout.size(), 0.0);
            fn(q, &grad);
            auto value = [&](const std::vector<double>& xv) {
                layout.unpack(xv, work);
                return fn(work, nullptr);
            };
            const double err = max_relative_fd_error(value, x, grad, dofs, 1e-6, 1e-7);
            CAPTURE(name);
            CAPTURE(trial);
            CHECK(err <= 1e-5);
        };
        verify([&](const State& s, std::vector<double>* grad) {
            return elastic_energy(s, mp, grad);
        }, "elastic");
        verify([&](const State& s, std::vector<double>* grad) {
            return exchange_energy(s, grad);
        }, "exchange");
        verify([&](const State& s, std::vector<double>* grad) {
            return load_work(s, loads, 0.7, grad);
        }, "load_work");
        verify([&](const State& s, std::vector<double>* grad) {
            return boundary_penalty(s, loads, 0.7, mp, grad);
        }, "penalty");
    }
}

TEST_CASE("time derivative") {
    RefGrid g(8, 8, {0, 0}, {1, 1});
    const MaterialParams mp = unit_params(2.0, 2.0);

    SUBCASE("constant loads give zero") {
        const LoadSchedule loads = LoadSchedule::zero_with_identity_datum(1.0, 3);
        const State id = State::reference(g);
        const TimeDerivative td = time_derivative(id, loads, 0.4, mp);
        CHECK(td.value == doctest::Approx(0.0));
        CHECK_FALSE(td.knot);
        CHECK(time_derivative(id, loads, 0.5, mp).knot);  // interior sample time
    }
    SUBCASE("boundary datum ramp with y = d(t) on Gamma gives zero") {
        const LoadSchedule loads = make_loads("0", "0", "x1 + 0.2*t", "x2");
        const double t = 0.3;
        State q(DeformationField::interpolate(
                    g, [&](Vec2 x) { return Vec2{x.x + 0.2 * t, x.y}; }),
                DirectorField(g));
        CHECK(time_derivative(q, loads, t, mp).value == doctest::Approx(0.0));
    }
    SUBCASE("field ramp dh/dt = e1 against z = e1 gives -|Omega| = -1") {
        const LoadSchedule loads = make_loads("t", "0");
        const State id = State::reference(g);
        CHECK(time_derivative(id, loads, 0.3, mp).value ==
              doctest::Approx(-1.0).epsilon(1e-13));
    }
    SUBCASE("matches central differences away from knots") {
        const LoadSchedule loads(
            {0.0, 0.5, 1.0}, Expr2::parse("0.2*t", "0"), Expr2::zero(),
            Expr2::parse("t*x2", "0.1*t"), Expr2::parse("x1 + 0.1*t*t", "x2"), {},
            {Side::Left, Side::Right});
        std::uint64_t rng = 4;
        const State q = random_state(g, rng, 0.05, 0.7);
        for (double t : {0.2, 0.37, 0.81}) {
            const double delta = 1e-5;
            const MaterialParams mp4 = unit_params(4.0, 2.0);
            const double fp = total_energy(q, loads, t + delta, mp4, nullptr).f_total;
            const double fm = total_energy(q, loads, t - delta, mp4, nullptr).f_total;
            CHECK(time_derivative(q, loads, t, mp4).value ==
                  doctest::Approx((fp - fm) / (2 * delta)).epsilon(1e-7));
        }
    }
    SUBCASE("work integral telescopes F(t, q) exactly for p = 2") {
        const LoadSchedule loads(
            {0.0, 0.5, 1.0}, Expr2::parse("0.3", "0.1*t"), Expr2::zero(),
            Expr2::parse("t", "0"), Expr2::parse("x1 + 0.2*t", "x2"), {},
            {Side::Bottom, Side::Top});
        std::uint64_t rng = 8;
        const State q = random_state(g, rng, 0.05, 0.7);
        const MaterialParams mp2 = unit_params(2.0, 2.0);
        const double t0 = 0.2, t1 = 0.9;
        const double direct = total_energy(q, loads, t1, mp2, nullptr).f_total -
                              total_energy(q, loads, t0, mp2, nullptr).f_total;
        const double integral = work_integral(q, loads, t0, t1, mp2);
        CHECK(integral == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("coercivity check") {
    SUBCASE("identity with alpha = beta = 1 holds with margin zero") {
        const CoercivityCheck c =
            coercivity_check(Mat2::identity(), {1, 0}, unit_params(2.0, 1.0));
        CHECK(c.holds);
        CHECK(c.margin == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("1000 random admissible pairs all hold") {
        MaterialParams mp;
        mp.alpha = 2.5;
        mp.beta = 0.4;
        mp.p = 3.0;
        mp.a = 1.5;
        std::uint64_t rng = 55;
        int checked = 0;
        while (checked < 1000) {
            Mat2 F{uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2),
                   uniform(rng, -2, 2)};
            if (F.det() <= 1e-3) continue;
            const double th = uniform(rng, -3.2, 3.2);
            const CoercivityCheck c =
                coercivity_check(F, {std::cos(th), std::sin(th)}, mp);
            CHECK(c.holds);
            ++checked;
        }
    }
    SUBCASE("barrier dominates under extreme compression") {
        MaterialParams mp = unit_params(2.0, 1.5);
        for (double s : {1e-1, 1e-2, 1e-4}) {
            const CoercivityCheck c = coercivity_check({s, 0, 0, 1}, {0, 1}, mp);
            CHECK(c.holds);
        }
        CHECK_THROWS_AS(coercivity_check({-1, 0, 0, 1}, {1, 0}, unit_params()),
                        InputError);
    }
}

TEST_CASE("stored energy is continuous across director alignment") {
    // W along an interpolated admissible path: no jumps at cell-director
    // alignment angles.
    MaterialParams mp;
    mp.alpha = 3.0;
    mp.beta = 0.5;
    const Mat2 F{1.1, 0.2, -0.1, 0.9};
    double prev = 0.0;
    bool first = true;
    for (int k = 0; k <= 400; ++k) {
        const double th = -3.2 + 6.4 * k / 400.0;
        const double w = stored_energy(F, {std::cos(th), std::sin(th)}, mp);
        if (!first) CHECK(std::abs(w - prev) < 0.1);
        prev = w;
        first = false;
    }
}

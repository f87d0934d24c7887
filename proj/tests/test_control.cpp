#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "elastoplast/control.hpp"
#include "elastoplast/dynamics.hpp"
#include "elastoplast/rng.hpp"
#include "test_support.hpp"

using namespace elastoplast;
using test_support::linear_drift;

namespace {

ControlVerification simulate_schedule(const State& x0, const ControlSchedule& sched,
                                      const State& xT, const DriftModel& m, double h) {
    SolverConfig cfg{h, sched.total_time, 0};
    return verify_control(x0, sched, xT, m, cfg);
}

}  // namespace

TEST_CASE("ramp_to_plastic: closed form hits z = 1 with a = 4") {
    const auto m = linear_drift();
    const auto seg = ramp_to_plastic(State{1.0, 0.0}, 0.5, m);
    CHECK(seg.c[1] == doctest::Approx(4.0).epsilon(1e-15));  // a = 2(1-0-0.5)/0.25
    CHECK(seg.end.y == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(seg.end.z == 1.0);
    // closed-form z at the endpoint is exactly 1
    CHECK(seg.z_at(seg.duration) == doctest::Approx(1.0).epsilon(1e-12));
    // forward simulation agrees
    ControlSchedule s{{seg}, seg.duration};
    const auto v = simulate_schedule(State{1.0, 0.0}, s, seg.end, m, 1e-5);
    CHECK(v.endpoint_error < 1e-3);
    CHECK(v.max_constraint_violation == 0.0);
}

TEST_CASE("ramp_to_plastic: coasting limit and out-of-range epsilon") {
    const auto m = linear_drift();
    // epsilon -> eps0 = (1-z0)/y0 = 1 gives a -> 0 (pure coasting)
    const auto seg = ramp_to_plastic(State{1.0, 0.0}, 1.0 - 1e-9, m);
    CHECK(seg.c[1] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(seg.end.y == doctest::Approx(1.0).epsilon(1e-8));

    CHECK_THROWS_AS((void)ramp_to_plastic(State{1.0, 0.0}, 1.5, m), ValidationError);
    CHECK_THROWS_AS((void)ramp_to_plastic(State{0.0, 0.0}, 0.5, m), ValidationError);
}

TEST_CASE("ramp_to_plastic: mirrored variant reaches z = -1") {
    const auto m = linear_drift();
    const auto seg = ramp_to_plastic(State{-1.0, 0.0}, 0.5, m);
    CHECK(seg.end.y == doctest::Approx(-3.0).epsilon(1e-15));
    CHECK(seg.end.z == -1.0);
    ControlSchedule s{{seg}, seg.duration};
    const auto v = simulate_schedule(State{-1.0, 0.0}, s, seg.end, m, 1e-5);
    CHECK(v.endpoint_error < 1e-3);
}

TEST_CASE("ramp_to_plastic: case-2 endpoint identity across random inputs") {
    const auto m = linear_drift();
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        const double y0 = rng.uniform(0.05, 4.0);
        const double z0 = rng.uniform(-1.0, 0.99);
        const double eps0 = (1.0 - z0) / y0;
        const double eps = rng.uniform(0.05, 0.95) * eps0;
        const auto seg = ramp_to_plastic(State{y0, z0}, eps, m);
        // z(eps) = eps^2 a/2 + y0 eps + z0 = 1 identically
        CHECK(std::abs(seg.z_at(eps) - 1.0) < 1e-12);
        CHECK(seg.end.y > 0.0);
    }
}

TEST_CASE("plastic_drain: pinned example and errors") {
    const auto m = linear_drift();
    const auto seg = plastic_drain(State{2.0, 1.0}, 1.0, m);
    // u(t) = -y0/T - f(y(t), 1) = -2 + (2 - 2t)
    CHECK(seg.u(0.0, m) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(seg.u(0.5, m) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(seg.u(1.0, m) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(seg.end.y == 0.0);
    CHECK(seg.end.z == 1.0);

    ControlSchedule s{{seg}, seg.duration};
    const auto v = simulate_schedule(State{2.0, 1.0}, s, State{0.0, 1.0}, m, 1e-5);
    CHECK(v.endpoint_error < 1e-3);
    CHECK(v.max_constraint_violation == 0.0);

    // already at the corner: hold with u = -f(0,1)
    const auto hold = plastic_drain(State{0.0, 1.0}, 2.0, m);
    CHECK(hold.u(1.0, m) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(hold.end.y == 0.0);

    CHECK_THROWS_AS((void)plastic_drain(State{1.0, 0.5}, 1.0, m), ValidationError);
    CHECK_THROWS_AS((void)plastic_drain(State{-1.0, 1.0}, 1.0, m), ValidationError);
}

TEST_CASE("kickoff: small constant push produces y > 0") {
    const auto m = linear_drift();
    const auto seg = kickoff(State{0.0, 0.0}, 1.0, 0.01, m);
    CHECK(seg.end.y > 0.0);
    CHECK(seg.end.y == doctest::Approx(0.01).epsilon(1e-2));
    CHECK(std::abs(seg.end.z) < 1.0);

    const auto low = kickoff(State{0.0, -1.0}, 1.0, 0.01, m);
    CHECK(low.end.y > 0.0);
    CHECK(low.end.z > -1.0);

    // strict inequality f(x0) + level > 0 required
    CHECK_THROWS_AS((void)kickoff(State{0.0, 0.0}, 0.0, 0.01, m), ValidationError);
}

TEST_CASE("descend_from_corner: power-law profile for the pinned target") {
    const auto m = linear_drift();
    const auto seg = descend_from_corner(State{-1.0, 0.0}, 3.0, m);
    CHECK(seg.profile == ControlSegment::Profile::power_law);
    CHECK(seg.beta == doctest::Approx(2.0).epsilon(1e-15));  // beta = (-1*3)/(-1) - 1
    // phi(t) = -(t/3)^2, integral over [0,3] = -1 = z_T - 1
    CHECK(seg.y_at(1.5) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(seg.z_at(3.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(seg.end.y == -1.0);

    ControlSchedule s{{seg}, seg.duration};
    const auto v = simulate_schedule(State{0.0, 1.0}, s, State{-1.0, 0.0}, m, 1e-5);
    CHECK(v.endpoint_error < 1e-3);
    CHECK(v.max_constraint_violation == 0.0);
}

TEST_CASE("descend_from_corner: infeasible horizon and quadratic fallback") {
    const auto m = linear_drift();
    // feasibility bound (1 - z_T)/|y_T| = 1
    CHECK_THROWS_AS((void)descend_from_corner(State{-1.0, 0.0}, 0.5, m), ValidationError);

    // beta < 1 triggers the quadratic profile: T in (tau, 2 tau)
    const auto seg = descend_from_corner(State{-1.0, 0.0}, 1.5, m);
    CHECK(seg.profile == ControlSegment::Profile::poly);
    CHECK(seg.y_at(1.5) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(seg.z_at(1.5) == doctest::Approx(0.0).epsilon(1e-12));
    for (int i = 0; i <= 100; ++i) CHECK(seg.y_at(1.5 * i / 100.0) <= 1e-12);

    // near-boundary targets remain feasible for short horizons
    const auto close = descend_from_corner(State{-1.0, 0.99}, 0.02, m);
    CHECK(close.z_at(0.02) == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("synthesize: spec route from (0.5, 0) to (-1, 0) in T = 4") {
    const auto m = linear_drift();
    const auto sched = synthesize_exact_control(State{0.5, 0.0}, State{-1.0, 0.0}, 4.0, m);
    double total = 0.0;
    for (const auto& seg : sched.segments) total += seg.duration;
    CHECK(total == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(sched.max_junction_residual(m) <= 1e-9);

    const auto v = simulate_schedule(State{0.5, 0.0}, sched, State{-1.0, 0.0}, m, 1e-4);
    CHECK(v.endpoint_error <= 1e-3);
    CHECK(v.max_constraint_violation == 0.0);
}

TEST_CASE("synthesize: from the corner reduces to descend plus hold") {
    const auto m = linear_drift();
    const auto sched = synthesize_exact_control(State{0.0, 1.0}, State{-1.0, 0.0}, 3.0, m);
    REQUIRE(sched.segments.size() == 2);
    CHECK(sched.segments[0].tag == SegmentCase::plastic_drain);  // hold at the corner
    CHECK(sched.segments[1].tag == SegmentCase::descend_from_corner);

    const auto v = simulate_schedule(State{0.0, 1.0}, sched, State{-1.0, 0.0}, m, 1e-4);
    CHECK(v.endpoint_error <= 1e-3);
}

TEST_CASE("synthesize: round trip through the corner") {
    const auto m = linear_drift();
    const auto sched = synthesize_exact_control(State{-1.0, 0.0}, State{-1.0, 0.0}, 4.0, m);
    const auto v = simulate_schedule(State{-1.0, 0.0}, sched, State{-1.0, 0.0}, m, 1e-4);
    CHECK(v.endpoint_error <= 1e-3);
    CHECK(v.max_constraint_violation == 0.0);
    CHECK(sched.max_junction_residual(m) <= 1e-9);
}

TEST_CASE("synthesize: mirrored targets with y_T > 0") {
    const auto m = linear_drift();
    for (const auto& [x0, xT] : std::vector<std::pair<State, State>>{
             {State{0.5, 0.0}, State{1.0, 0.0}},
             {State{-2.0, 0.5}, State{0.3, -0.6}},
             {State{0.0, -1.0}, State{2.0, 0.2}},
         }) {
        const auto sched = synthesize_exact_control(x0, xT, 4.0, m);
        CHECK(sched.max_junction_residual(m) <= 1e-9);
        const auto v = simulate_schedule(x0, sched, xT, m, 1e-4);
        CHECK(v.endpoint_error <= 1e-3);
        CHECK(v.max_constraint_violation == 0.0);
    }
}

TEST_CASE("synthesize: boundary and corner starts") {
    const auto m = linear_drift();
    for (const auto& x0 : {State{2.0, 1.0}, State{-2.0, -1.0}, State{0.0, -1.0}, State{0.0, 1.0},
                           State{-0.5, 1.0}, State{0.5, -1.0}}) {
        const auto sched = synthesize_exact_control(x0, State{-0.7, 0.3}, 4.0, m);
        const auto v = simulate_schedule(x0, sched, State{-0.7, 0.3}, m, 1e-4);
        CAPTURE(x0.y);
        CAPTURE(x0.z);
        CHECK(v.endpoint_error <= 1e-3);
        CHECK(sched.max_junction_residual(m) <= 1e-9);
    }
}

TEST_CASE("synthesize: invalid targets rejected") {
    const auto m = linear_drift();
    CHECK_THROWS_AS((void)synthesize_exact_control(State{0, 0}, State{0.0, 0.5}, 4.0, m),
                    ValidationError);
    CHECK_THROWS_AS((void)synthesize_exact_control(State{0, 0}, State{1.0, 1.0}, 4.0, m),
                    ValidationError);
    CHECK_THROWS_AS((void)synthesize_exact_control(State{0, 0}, State{1.0, 0.0}, -1.0, m),
                    ValidationError);
}

TEST_CASE("synthesize: endpoint error decays at first order in h") {
    const auto m = linear_drift();
    const State x0{0.5, 0.0}, xT{-1.0, 0.2};
    const auto sched = synthesize_exact_control(x0, xT, 4.0, m);
    std::vector<double> errs;
    for (double h : {1e-3, 5e-4, 2.5e-4}) {
        const auto v = simulate_schedule(x0, sched, xT, m, h);
        errs.push_back(v.endpoint_error);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double ratio = errs[i - 1] / errs[i];
        CHECK(ratio > 1.5);
        CHECK(ratio < 2.5);
    }
}

TEST_CASE("verify_control: empty schedule and constructed junction defect") {
    const auto m = linear_drift();
    ControlSchedule empty;
    SolverConfig cfg{1e-3, 0.0, 0};
    const auto v = verify_control(State{1.0, 0.5}, empty, State{1.0, 0.5}, m, cfg);
    CHECK(v.endpoint_error == 0.0);

    // two constant segments with a unit jump at the junction
    ControlSegment s1, s2;
    s1.tag = SegmentCase::linear;
    s1.profile = ControlSegment::Profile::constant_control;
    s1.duration = 0.5;
    s1.level = 0.0;
    s2 = s1;
    s2.level = 1.0;
    ControlSchedule defect{{s1, s2}, 1.0};
    CHECK(defect.max_junction_residual(m) == doctest::Approx(1.0));
}

TEST_CASE("linearize: analytic and finite-difference coefficients") {
    const auto m = linear_drift();
    SolverConfig cfg{1e-3, 1.0, 0};
    const auto ref = integrate_unforced(State{0.1, 0.0}, m, cfg);
    const auto sys = linearize(m, ref);
    for (double a : sys.a) CHECK(a == -1.0);
    for (double b : sys.b) CHECK(b == 0.0);

    // f = -y + z^2 around the constant reference (0, 0.2): a = -1, b = 0.4
    DriftModel quad = m;
    quad.name = "quad-z";
    quad.f = [](double y, double z) { return -y + z * z; };
    quad.fy = [](double, double) { return -1.0; };
    quad.fz = [](double, double z) { return 2.0 * z; };
    quad.smooth_radius = 1.0;
    Trajectory flat;
    flat.h = 0.1;
    flat.states.assign(11, State{0.0, 0.2});
    const auto qsys = linearize(quad, flat);
    for (double a : qsys.a) CHECK(a == doctest::Approx(-1.0).epsilon(1e-12));
    for (double b : qsys.b) CHECK(b == doctest::Approx(0.4).epsilon(1e-12));

    // central differences agree with analytic partials for f = -y + sin z
    DriftModel trig = m;
    trig.f = [](double y, double z) { return -y + std::sin(z); };
    trig.fy = nullptr;
    trig.fz = nullptr;
    trig.smooth_radius = 1.0;
    for (double z : {-0.5, 0.0, 0.4}) {
        CHECK(std::abs(trig.df_dy(0.1, z) - (-1.0)) < 1e-6);
        CHECK(std::abs(trig.df_dz(0.1, z) - std::cos(z)) < 1e-6);
    }

    // reference leaving the smooth ball is rejected
    Trajectory far;
    far.h = 0.1;
    far.states.assign(3, State{5.0, 0.0});
    CHECK_THROWS_AS((void)linearize(m, far), ValidationError);
}

namespace {

LinearizedSystem constant_linear_system(double a, double b, double h, double t0) {
    LinearizedSystem sys;
    sys.h = h;
    sys.t0 = t0;
    const auto n = static_cast<std::size_t>(std::llround(t0 / h));
    sys.a.assign(n + 1, a);
    sys.b.assign(n + 1, b);
    return sys;
}

}  // namespace

TEST_CASE("linear_control: pinned quadratic profile and forward oracle") {
    const auto sys = constant_linear_system(-1.0, 0.0, 1e-5, 1.0);
    const auto V = linear_control(sys, 1.0, 1.0);
    // phi = -3 t^2 + 4 t, V = phi' + phi = -3 t^2 - 2 t + 4
    auto expect = [](double t) { return -3.0 * t * t - 2.0 * t + 4.0; };
    CHECK(V.values.front() == doctest::Approx(expect(0.0)).epsilon(1e-12));
    CHECK(V.values[50000] == doctest::Approx(expect(0.5)).epsilon(1e-12));
    CHECK(V.values.back() == doctest::Approx(expect(1.0)).epsilon(1e-12));

    const auto [Y, Z] = simulate_linear(sys, V);
    CHECK(std::abs(Y - 1.0) < 1e-6);
    CHECK(std::abs(Z - 1.0) < 1e-6);
}

TEST_CASE("linear_control: zero target gives zero control") {
    const auto sys = constant_linear_system(-1.0, 0.0, 1e-3, 1.0);
    const auto V = linear_control(sys, 0.0, 0.0);
    for (double v : V.values) CHECK(v == 0.0);
}

TEST_CASE("linear_control: (1,0) target solved from the 2x2 system") {
    const auto sys = constant_linear_system(-1.0, 0.0, 1e-5, 1.0);
    const auto V = linear_control(sys, 1.0, 0.0);
    const auto [Y, Z] = simulate_linear(sys, V);
    CHECK(std::abs(Y - 1.0) < 1e-6);
    CHECK(std::abs(Z - 0.0) < 1e-6);
}

TEST_CASE("linear_control: surjectivity over the 5x5 target grid") {
    // time-varying coefficients from a genuine reference trajectory
    const auto m = linear_drift();
    SolverConfig cfg{1e-5, 1.0, 0};
    const auto ref = integrate_unforced(State{0.05, 0.1}, m, cfg);
    const auto sys = linearize(m, ref);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double Y1 = -1.0 + 0.5 * i;
            const double Z1 = -1.0 + 0.5 * j;
            const auto V = linear_control(sys, Y1, Z1);
            const auto [Y, Z] = simulate_linear(sys, V);
            CHECK(std::abs(Y - Y1) < 1e-6);
            CHECK(std::abs(Z - Z1) < 1e-6);
        }
    }
}

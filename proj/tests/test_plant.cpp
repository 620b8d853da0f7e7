#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qrate/plant.hpp"
#include "support.hpp"

using namespace qrate;

namespace {

DisturbanceSignal sec7_pulses() {
    return {1, PulseTrainSignal{{Pulse{10.5, 10.7, {1.5}}, Pulse{22.5, 22.7, {1.5}}}}};
}

}  // namespace

TEST_CASE("disturbance sup-norms") {
    CHECK(DisturbanceSignal::zero(2).sup_norm_on(0.0, 5.0) == 0.0);
    const DisturbanceSignal pulses = sec7_pulses();
    CHECK(pulses.sup_norm_on(10.4, 10.6) == 1.5);
    CHECK(pulses.sup_norm_on(10.7, 12.0) == 0.0);  // right end of the pulse is open
    CHECK(pulses.sup_norm_on(10.0, 10.5) == 0.0);  // a single instant has measure zero
    CHECK(pulses.value(10.5)[0] == 1.5);
    CHECK(pulses.breakpoints(10.0, 11.0) == std::vector<double>{10.5, 10.7});
    CHECK(pulses.onsets(40.0) == std::vector<double>{10.5, 22.5});
    CHECK_THROWS_AS((void)pulses.sup_norm_on(2.0, 1.0), std::invalid_argument);

    const DisturbanceSignal c(1, ConstantSignal{{0.3}});
    CHECK(c.sup_norm_on(0.0, 1.0) == 0.3);

    const DisturbanceSignal sine(2, SinusoidSignal{{1.0, 2.0}, 1.0, 0.0});
    CHECK(sine.sup_norm_on(0.0, 0.1) == doctest::Approx(2.0 * std::sin(2.0 * M_PI * 0.1)));
    CHECK(sine.sup_norm_on(0.0, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("seeded uniform disturbance") {
    const DisturbanceSignal a(2, SeededUniformSignal{0.4, 9, 0.25});
    const DisturbanceSignal b(2, SeededUniformSignal{0.4, 9, 0.25});
    double best = 0.0;
    for (int m = 0; m < 200; ++m) {
        const Vector v = a.value(m * 0.25 + 0.1);
        CHECK(v == b.value(m * 0.25 + 0.2));
        best = std::max(best, inf_norm(v));
        CHECK(inf_norm(v) <= 0.4);
    }
    CHECK(a.sup_norm_on(0.0, 50.0) == best);
    DisturbanceSignal c = a;
    c.reseed(10);
    CHECK_FALSE(c == a);
    CHECK(c.value(0.1) != a.value(0.1));
}

TEST_CASE("searching interval with no disturbance is the open-loop flow") {
    const PlantModel m = qtest::sec7_plant();
    const Vector x{0.7, -0.2};
    const Vector xs{0.5, 0.1};
    const IntervalResult r = step_interval(m, x, xs, Stage::searching, DisturbanceSignal::zero(1), 3.0);
    const Matrix e = expm(m.A, m.tau_s);
    const Vector want = e * x;
    CHECK(r.x_end[0] == doctest::Approx(want[0]).epsilon(1e-12));
    CHECK(r.x_end[1] == doctest::Approx(want[1]).epsilon(1e-12));
    const double err0 = inf_norm(vec_sub(x, xs));
    CHECK(inf_norm(vec_sub(r.x_end, r.x_hat_end)) <= std::exp(0.1) * err0 * (1 + 1e-12));
}

TEST_CASE("pure integrator with constant disturbance") {
    PlantModel m;
    m.A = Matrix(2, 2);
    m.B = Matrix(2, 1);
    m.D = Matrix::identity(2);
    m.K = Matrix(1, 2);
    m.tau_s = 0.4;
    m.N = 2;
    const DisturbanceSignal c(2, ConstantSignal{{0.3, -0.1}});
    const IntervalResult r = step_interval(m, Vector{1.0, 2.0}, Vector{0.0, 0.0}, Stage::stabilizing, c, 0.0);
    CHECK(r.x_end[0] == doctest::Approx(1.0 + 0.4 * 0.3).epsilon(1e-14));
    CHECK(r.x_end[1] == doctest::Approx(2.0 - 0.4 * 0.1).epsilon(1e-14));
}

TEST_CASE("stabilizing interval from the cell centre has zero error") {
    const PlantModel m = qtest::sec7_plant();
    const Vector c{0.4, 0.1};
    std::vector<DenseRecord> dense;
    const IntervalResult r =
        step_interval(m, c, c, Stage::stabilizing, DisturbanceSignal::zero(1), 0.0, 100, &dense);
    const Vector want = expm(m.A + m.B * m.K, m.tau_s) * c;
    CHECK(r.x_end[0] == doctest::Approx(want[0]).epsilon(1e-12));
    CHECK(r.x_end[1] == doctest::Approx(want[1]).epsilon(1e-12));
    CHECK(dense.size() == 101);
    for (const auto& p : dense) CHECK(inf_norm(vec_sub(p.x, p.x_hat)) < 1e-14);
    CHECK(dense.front().u[0] == doctest::Approx(-1.4));
}

TEST_CASE("pulse edges inside a substep are integrated exactly") {
    PlantModel m;
    m.A = Matrix{{-1.0}};
    m.B = Matrix{{0.0}};
    m.D = Matrix{{1.0}};
    m.K = Matrix{{0.0}};
    m.tau_s = 1.0;
    m.N = 2;
    const DisturbanceSignal p(1, PulseTrainSignal{{Pulse{0.3333, 0.6667, {2.0}}}});
    const IntervalResult r = step_interval(m, Vector{0.0}, Vector{0.0}, Stage::searching, p, 0.0, 7);
    // x(1) = 2 (e^{-(1 - 0.6667)} - e^{-(1 - 0.3333)})
    const double want = 2.0 * (std::exp(-(1.0 - 0.6667)) - std::exp(-(1.0 - 0.3333)));
    CHECK(r.x_end[0] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("sinusoid uses RK4 and converges") {
    PlantModel m;
    m.A = Matrix{{-1.0}};
    m.B = Matrix{{0.0}};
    m.D = Matrix{{1.0}};
    m.K = Matrix{{0.0}};
    m.tau_s = 1.0;
    m.N = 2;
    const double w = 2.0 * M_PI;
    const DisturbanceSignal s(1, SinusoidSignal{{1.0}, 1.0, 0.0});
    const IntervalResult r = step_interval(m, Vector{0.0}, Vector{0.0}, Stage::searching, s, 0.0, 200);
    // x' = -x + sin(w t), x(0) = 0
    const double want = (std::sin(w) - w * std::cos(w) + w * std::exp(-1.0)) / (1.0 + w * w);
    CHECK(r.x_end[0] == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("equilibrium is invariant") {
    const PlantModel m = qtest::sec7_plant();
    const DesignParams p = qtest::sec7_raw_design();
    const DerivedConstants d = derive_constants(m, p);
    const TrajectoryLog log = run_closed_loop(m, p, d, DisturbanceSignal::zero(1), Vector{0.0, 0.0}, 5.0);
    CHECK(log.samples.size() == 50);
    CHECK(log.events.empty());
    for (const auto& s : log.samples) {
        CHECK(s.visible());
        CHECK(inf_norm(s.x) == 0.0);
    }
    for (const auto& pt : log.dense) CHECK(inf_norm(pt.x) == 0.0);
}

TEST_CASE("two-state scenario: capture, escapes and recaptures") {
    const PlantModel m = qtest::sec7_plant();
    const DesignParams p = qtest::sec7_raw_design();
    const DerivedConstants d = derive_constants(m, p);
    const TrajectoryLog log = run_closed_loop(m, p, d, sec7_pulses(), Vector{1.0, 1.0}, 40.0);
    REQUIRE(log.samples.size() == 400);
    CHECK_FALSE(log.samples[0].visible());
    REQUIRE(log.events.size() == 5);
    CHECK(log.events[0].kind == EventKind::captured);
    CHECK(log.events[0].k <= 4);
    for (std::size_t i = 1; i < log.events.size(); ++i)
        CHECK(log.events[i].kind != log.events[i - 1].kind);

    const double t1 = log.events[1].t;
    const double t2 = log.events[3].t;
    CHECK(t1 > 10.5);
    CHECK(t2 > 22.5);
    // the first samples after each pulse onset where the state is outside the range
    for (const double onset : {10.5, 22.5}) {
        const Event* esc = nullptr;
        for (const auto& e : log.events)
            if (e.kind == EventKind::escaped && e.t > onset && !esc) esc = &e;
        REQUIRE(esc);
        for (const auto& s : log.samples)
            if (s.t > onset && s.t < esc->t) CHECK(s.visible());
    }
}

TEST_CASE("inter-sample envelope and error recursions hold on the logged run") {
    const PlantModel m = qtest::sec7_plant();
    const DesignParams p = qtest::sec7_raw_design();
    const DerivedConstants d = derive_constants(m, p);
    const DisturbanceSignal sig = sec7_pulses();
    const TrajectoryLog log = run_closed_loop(m, p, d, sig, Vector{1.0, 1.0}, 30.0);
    for (const auto& pt : log.dense) {
        const SampleRecord& s = log.samples[pt.k];
        const double rhs = d.H_tilde * inf_norm(s.x) + d.Phi * sig.sup_norm_on(s.t, pt.t);
        CHECK(inf_norm(pt.x) <= rhs * (1 + 1e-9) + 1e-15);
    }
    for (const auto& s : log.samples) {
        const double e_end = inf_norm(vec_sub(s.x_end, s.x_hat_end));
        const double rhs = s.visible()
                               ? d.Lambda_eff / d.N * s.E + d.Phi * s.d_sup_next
                               : d.Lambda_eff * inf_norm(vec_sub(s.x, s.x_hat)) + d.Phi * s.d_sup_next;
        CHECK(e_end <= rhs * (1 + 1e-9) + 1e-15);
    }
}

TEST_CASE("runs are deterministic") {
    const PlantModel m = qtest::sec7_plant();
    const DesignParams p = qtest::sec7_raw_design();
    const DerivedConstants d = derive_constants(m, p);
    const DisturbanceSignal sig(1, SeededUniformSignal{0.3, 4, 0.05});
    const TrajectoryLog a = run_closed_loop(m, p, d, sig, Vector{1.0, -1.0}, 8.0);
    const TrajectoryLog b = run_closed_loop(m, p, d, sig, Vector{1.0, -1.0}, 8.0);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        CHECK(a.samples[k].x == b.samples[k].x);
        CHECK(a.samples[k].E == b.samples[k].E);
        CHECK(a.samples[k].symbol == b.samples[k].symbol);
    }
    REQUIRE(a.dense.size() == b.dense.size());
    for (std::size_t i = 0; i < a.dense.size(); ++i) CHECK(a.dense[i].x == b.dense[i].x);
}

TEST_CASE("decimation keeps endpoints") {
    const PlantModel m = qtest::sec7_plant();
    const DesignParams p = qtest::sec7_raw_design();
    const DerivedConstants d = derive_constants(m, p);
    RunOptions opt;
    opt.decimation = 10;
    const TrajectoryLog log = run_closed_loop(m, p, d, DisturbanceSignal::zero(1), Vector{0.1, 0.1}, 1.0, opt);
    CHECK(log.dense.size() == 10 * 11);
}

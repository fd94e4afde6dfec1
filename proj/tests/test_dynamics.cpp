#include <doctest.h>

#include "fockprog/dynamics.hpp"
#include "fockprog/errors.hpp"
#include "fockprog/perturbative.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fockprog;

namespace {

constexpr double kPi = std::numbers::pi;

SystemParams full_dynamics_point() {
    SystemParams p;
    p.omega_q = ghz(7.0);
    p.omega_a = ghz(6.3);
    p.omega_b = ghz(7.7);
    p.g_a = p.g_b = mhz(70.0);
    p.rabi_omega = mhz(20.0);
    return p;
}

SystemParams dissipation_point() {
    SystemParams p;
    p.rabi_omega = mhz(20.0);
    p.g_a = p.g_b = mhz(100.0);
    return p;
}

PulseProgram one_step(const PulseStep& st, const SystemParams& p) {
    PulseProgram prog;
    prog.rates = ProgramRates::from(p);
    prog.steps.push_back(st);
    return prog;
}

AmplitudeTable random_target(std::mt19937_64& rng, int na, int nb) {
    std::normal_distribution<double> nd;
    Matrix c(na + 1, nb + 1);
    for (int i = 0; i <= na; ++i)
        for (int j = 0; j <= nb; ++j) c(i, j) = cplx(nd(rng), nd(rng));
    c /= c.norm();
    return AmplitudeTable(c);
}

Matrix random_hermitian(std::mt19937_64& rng, Eigen::Index d, double scale) {
    std::normal_distribution<double> nd;
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(nd(rng), nd(rng));
    return scale * 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_CASE("schedule from the NOON program") {
    const auto p = full_dynamics_point();
    const auto prog = noon_program(3, p);
    const auto sch = schedule_from_program(prog, p);
    std::size_t main = 0;
    for (const auto& s : sch.segments)
        if (s.kind != StepKind::phase_shift) ++main;
    CHECK(main == 12);
    CHECK(sch.span() == doctest::Approx(program_bounds(prog).program_duration).epsilon(1e-12));
    CHECK(sch.span() == doctest::Approx(t_noon_bound(3, prog.rates)).epsilon(1e-12));
    for (const auto& s : sch.segments) {
        if (s.kind == StepKind::rabi) {
            REQUIRE(s.drive.has_value());
            CHECK(s.omega_q == p.omega_q);
        } else if (s.kind == StepKind::swap_a) {
            CHECK(s.omega_q == p.omega_a);
            CHECK(!s.drive);
        } else if (s.kind == StepKind::swap_b) {
            CHECK(s.omega_q == p.omega_b);
        }
    }
    // calibrated: swaps parked near the resonators; the dressed crossing drifts
    // with the ladder index but stays inside g sqrt(n)
    ScheduleOptions o;
    o.calibrate = true;
    o.selective_rates = false;
    const auto cal = schedule_from_program(prog, p, o);
    for (const auto& s : cal.segments) {
        const double w = std::sqrt(double(prog.steps[s.step].n_class));
        if (s.kind == StepKind::swap_a) CHECK(std::abs(s.omega_q - p.omega_a) < p.g_a * w);
        if (s.kind == StepKind::swap_b) CHECK(std::abs(s.omega_q - p.omega_b) < p.g_b * w);
    }
    CHECK(schedule_from_program(PulseProgram{}, p).segments.empty());
}

TEST_CASE("phase-shift segments") {
    auto p = full_dynamics_point();
    p.shift_omega = mhz(100.0);
    PulseStep st;
    st.kind = StepKind::phase_shift;
    st.theta = kPi;
    const auto sch = schedule_from_program(one_step(st, p), p);
    REQUIRE(sch.segments.size() == 1);
    CHECK(sch.segments[0].t_end - sch.segments[0].t_start == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(sch.segments[0].omega_q == doctest::Approx(p.omega_q + p.shift_omega));
    st.theta = -kPi / 2;
    const auto neg = schedule_from_program(one_step(st, p), p);
    CHECK(neg.segments[0].t_end == doctest::Approx(2.5));
    CHECK(neg.segments[0].omega_q == doctest::Approx(p.omega_q - p.shift_omega));
    // with ramps the plateau keeps its length and the ramp is added once
    ScheduleOptions o;
    o.ramp_ns = 1.0;
    const auto r = schedule_from_program(one_step(st, p), p, o);
    CHECK(r.segments[0].t_end == doctest::Approx(3.5));
    CHECK(segment_omega_q(r.segments[0], p.omega_q, 0.0) == doctest::Approx(p.omega_q));
    CHECK(segment_omega_q(r.segments[0], p.omega_q, 1.75) == doctest::Approx(p.omega_q - p.shift_omega));
}

TEST_CASE("schedule validation") {
    ControlSchedule s;
    s.omega_q_idle = ghz(7.0);
    ScheduleSegment a, b;
    a.t_end = 2.0;
    b.t_start = 1.5;
    b.t_end = 3.0;
    s.segments = {a, b};
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("overlaps"), ValidationError);
    b.t_start = 2.0;
    b.t_end = 1.0;
    s.segments = {a, b};
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("negative"), ValidationError);
    b.t_end = 3.0;
    b.ramp = 0.8;
    s.segments = {a, b};
    CHECK_THROWS_AS(s.validate(), ValidationError);
    b.ramp = 0.5;
    s.segments = {a, b};
    CHECK_NOTHROW(s.validate());

    const auto p = full_dynamics_point();
    PulseStep st;
    st.duration = -1.0;
    CHECK_THROWS_AS(schedule_from_program(one_step(st, p), p), ValidationError);
}

TEST_CASE("propagation basics") {
    auto p = full_dynamics_point();
    const auto sp = make_space(2, 1, 1);
    // empty schedule returns the input
    const auto psi = basis_state(sp, 0, 1, 0);
    const auto r0 = propagate(ControlSchedule{p.omega_q, {}}, p, psi, 0.1);
    CHECK((r0.final - psi.amps).norm() == 0.0);
    CHECK_THROWS_AS(propagate(ControlSchedule{p.omega_q, {}}, p, psi, 0.0), ValidationError);

    // isolated qubit, resonant pi pulse
    p.g_a = p.g_b = mhz(1e-4);
    PulseStep st;
    st.theta = kPi;
    st.duration = kPi / p.rabi_omega;
    const auto sch = schedule_from_program(one_step(st, p), p);
    const auto r = propagate(sch, p, basis_state(sp, 0, 0, 0), 0.05);
    CHECK(std::norm(r.final(Eigen::Index(sp.index(1, 0, 0)))) >= 0.999);
    CHECK(r.max_norm_drift <= 1e-8);
    CHECK(!r.samples.empty());
}

TEST_CASE("calibration") {
    // g -> 0: identity corrections
    auto weak = full_dynamics_point();
    weak.g_a = weak.g_b = mhz(0.01);
    const auto sp = make_space(2, 3, 3);
    for (int n : {-2, 0, 1, 3}) {
        PulseStep st;
        st.theta = kPi;
        st.n_class = n;
        st.duration = kPi / weak.rabi_omega;
        const auto c = calibrate_step(st, weak, sp, AddressingRule::difference);
        CHECK(c.amplitude_factor == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(c.duration_factor == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(std::abs(c.frequency_shift) < 1e-6 * c.frequency);
    }
    // full-dynamics point, class 1: the exact line sits within delta_omega/2 of the formula
    const auto p = full_dynamics_point();
    const double dw = std::abs(make_dispersive_map(p, 2).delta_omega);
    PulseStep r1;
    r1.theta = kPi;
    r1.n_class = 1;
    r1.duration = kPi / p.rabi_omega;
    const auto c1 = calibrate_step(r1, p, sp, AddressingRule::difference);
    CHECK(std::abs(c1.frequency - transition_frequency(p, 1, 0)) <= dw / 2);
    CHECK(c1.amplitude_factor > 1.0);
    CHECK(c1.rate == p.rabi_omega);
    // explicit slower rate stretches the pulse
    const auto slow = calibrate_step(r1, p, sp, AddressingRule::difference, 0.0, 0.5 * p.rabi_omega);
    CHECK(slow.duration == doctest::Approx(2.0 * r1.duration));
    CHECK(slow.amplitude == doctest::Approx(0.5 * c1.amplitude));

    // full swap A on n_a = 1
    PulseStep sa;
    sa.kind = StepKind::swap_a;
    sa.theta = kPi / 2;
    sa.n_class = 1;
    sa.duration = kPi / (2 * p.g_a);
    const auto cs = calibrate_step(sa, p, sp, AddressingRule::difference);
    CHECK(std::abs(cs.duration - kPi / (2 * p.g_a)) <= 0.1 * kPi / (2 * p.g_a));
    CHECK(std::abs(cs.omega_q - p.omega_a) < p.g_a);

    PulseStep bad = r1;
    bad.n_class = 5;
    CHECK_THROWS_AS(calibrate_step(bad, p, sp, AddressingRule::difference), ValidationError);
}

TEST_CASE("selective rate") {
    const auto p = full_dynamics_point();
    const auto prog = noon_program(3, p);
    const auto sp = ideal_space(prog, 1);
    // before step 3 (class 1 pi pulse) |0,0,0> and |0,1,0> are populated
    StateVector s = basis_state(sp, 0, 0, 0);
    for (int k = 0; k < 2; ++k) apply_step_ideal(s, prog.steps[std::size_t(k)], prog.rule, prog.rates);
    const auto [rate, leak] = selective_rate(prog.steps[2], s, p, prog.rule, p.rabi_omega);
    CHECK(rate <= p.rabi_omega);
    CHECK(rate >= 0.1 * p.rabi_omega);
    CHECK(leak < 1e-3);
    // nothing else populated: full rate
    const auto [r0, l0] = selective_rate(prog.steps[0], basis_state(sp, 0, 0, 0), p, prog.rule, p.rabi_omega);
    CHECK(r0 == p.rabi_omega);
    CHECK(l0 == 0.0);
}

TEST_CASE("pure qubit decay") {
    const auto sp = make_space(2, 0, 0);
    PiecewiseHamiltonian h;
    h.push_constant(Matrix::Zero(2, 2), 400.0);
    const DecoherenceParams dec{250.0, kInf};
    const auto c = collapse_operators(sp, dec);
    REQUIRE(c.size() == 1);
    const Matrix rho0 = pure_density(basis_state(sp, 1, 0, 0)).m;
    EvolveOptions o;
    o.sample_every = 10.0;
    const auto obs = observables(sp);
    const auto r = lindblad_evolve(h, c, rho0, o, &obs);
    REQUIRE(r.samples.size() > 10);
    for (const auto& s : r.samples) CHECK(std::abs(s.q - std::exp(-s.t / 250.0)) < 1e-7);
    CHECK(std::abs(r.final(1, 1).real() - std::exp(-400.0 / 250.0)) < 1e-7);
    CHECK(r.max_trace_drift <= 1e-7);
}

TEST_CASE("closed limits agree across engines") {
    const auto p = dissipation_point();
    const auto prog = noon_program(3, p);
    const auto sp = ideal_space(prog, 1);
    const auto h = ideal_hamiltonian(prog, sp);
    const auto psi0 = basis_state(sp, 0, 0, 0);
    const auto closed = propagate(h, psi0.amps);
    const auto ideal = run_ideal(prog, psi0);
    // ideal-mode generators reproduce the ideal maps
    CHECK(fidelity(StateVector{sp, closed.final}, ideal) >= 1 - 1e-7);
    CHECK(fidelity(StateVector{sp, closed.final}, noon_target(3).to_state(sp)) >= 1 - 1e-7);
    CHECK(closed.max_norm_drift <= 1e-8);

    // Lindblad with no channels = pure-state propagation
    const auto lin = lindblad_evolve(h, {}, pure_density(psi0).m);
    const double f_lin = ideal.amps.dot(lin.final * ideal.amps).real();
    CHECK(std::abs(f_lin - fidelity(StateVector{sp, closed.final}, ideal)) < 1e-7);

    // trajectories with no channels: all identical, zero spread
    const auto tr = mcwf_sample(h, {}, psi0.amps, ideal.amps, 16, 7);
    CHECK(tr.std_error == 0.0);
    CHECK(tr.jumps == 0);
    for (double f : tr.fidelities) CHECK(f == tr.fidelities.front());
    CHECK(std::abs(tr.mean_fidelity - fidelity(StateVector{sp, closed.final}, ideal)) < 1e-7);
}

TEST_CASE("ideal-mode generators match the ideal maps on random programs") {
    const auto p = dissipation_point();
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> dim(0, 2);
    for (int seed = 0; seed < 100; ++seed) {
        const auto t = random_target(rng, dim(rng), dim(rng));
        SynthesisOptions so;
        if (seed % 2) {
            so.rule = AddressingRule::sum;
            so.atom_levels = 3;
        }
        const auto prog = synthesize(t, p, so);
        const auto sp = ideal_space(prog);
        const auto psi0 = basis_state(sp, 0, 0, 0);
        const auto out = propagate(ideal_hamiltonian(prog, sp), psi0.amps);
        CHECK(fidelity(StateVector{sp, out.final}, run_ideal(prog, psi0)) >= 1 - 1e-7);
        CHECK(out.max_norm_drift <= 1e-8);
    }
}

TEST_CASE("solver hygiene on random piecewise problems") {
    std::mt19937_64 rng(314);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    for (int seed = 0; seed < 100; ++seed) {
        const Eigen::Index d = 4 + seed % 4;
        PiecewiseHamiltonian h;
        for (int k = 0; k < 3; ++k) h.push_constant(random_hermitian(rng, d, u(rng)), u(rng) * 5.0);
        Vector psi = Vector::Zero(d);
        psi(0) = 1.0;
        const auto c = propagate(h, psi);
        CHECK(c.max_norm_drift <= 1e-8);

        std::vector<Matrix> ops;
        for (int k = 0; k < 2; ++k) {
            Matrix l = Matrix::Zero(d, d);
            l(k, k + 1) = std::sqrt(0.05 * u(rng));
            ops.push_back(l);
        }
        const auto l = lindblad_evolve(h, ops, psi * psi.adjoint());
        CHECK(l.max_trace_drift <= 1e-7);
        CHECK(l.max_hermiticity <= 1e-9);
        CHECK(l.min_eigenvalue > -1e-6);
    }
}

TEST_CASE("trajectories are deterministic and thread independent") {
    const auto p = dissipation_point();
    const DecoherenceParams dec{300.0, 5000.0};
    EvolveOptions one;
    one.threads = 1;
    EvolveOptions many;
    many.threads = 3;
    const auto a = method1_trajectories(2, p, dec, 24, 42, one);
    const auto b = method1_trajectories(2, p, dec, 24, 42, many);
    const auto c = method1_trajectories(2, p, dec, 24, 42, many);
    CHECK(a.mean_fidelity == b.mean_fidelity);
    CHECK(b.mean_fidelity == c.mean_fidelity);
    CHECK(a.fidelities == b.fidelities);
    CHECK(a.std_error == b.std_error);
    CHECK(a.jumps == b.jumps);
    const auto d = method1_trajectories(2, p, dec, 24, 43, one);
    CHECK(d.fidelities != a.fidelities);
    // a prefix of a larger run is the smaller run
    const auto e = method1_trajectories(2, p, dec, 48, 42, many);
    for (std::size_t k = 0; k < 24; ++k) CHECK(e.fidelities[k] == a.fidelities[k]);
    double mean = 0.0;
    for (double f : a.fidelities) mean += f;
    CHECK(a.mean_fidelity == doctest::Approx(mean / 24).epsilon(1e-14));

    std::mt19937_64 rng(8);
    for (int seed = 0; seed < 100; ++seed) {
        const std::uint64_t s = rng();
        const auto x = method1_trajectories(1, p, {60.0, 1000.0}, 3, s, one);
        const auto y = method1_trajectories(1, p, {60.0, 1000.0}, 3, s, many);
        CHECK(x.fidelities == y.fidelities);
    }
}

TEST_CASE("ideal-mode dissipation against the closed forms") {
    const auto p = dissipation_point();
    const DecoherenceParams dec{500.0, 1e4};
    const auto l3 = method1_lindblad(3, p, dec);
    const double f3 = fidelity_closed(NoonMethod::m1, 3, dec, p.rabi_omega, p.g_a);
    CHECK(std::abs(l3.lindblad - f3) <= 0.02);
    CHECK(l3.detail.max_trace_drift <= 1e-7);
    CHECK(l3.detail.max_hermiticity <= 1e-9);
    CHECK(l3.closed_reference_norm == doctest::Approx(1.0).epsilon(1e-8));

    const auto t3 = method1_trajectories(3, p, dec, 1024, 20240917);
    CHECK(std::abs(t3.mean_fidelity - l3.lindblad) <= 3.0 * t3.std_error);
    CHECK(t3.std_error > 0.0);

    const auto m2 = method2_lindblad(2, p, dec);
    CHECK(std::abs(m2.lindblad - fidelity_closed(NoonMethod::m2, 2, dec, p.rabi_omega, p.g_a)) <= 0.02);
    auto uneq = p;
    uneq.g_b = mhz(90.0);
    CHECK_THROWS_AS(method2_model(2, uneq, dec), ValidationError);

    // longer coherence never hurts
    const auto better = method1_lindblad(2, p, {1000.0, 1e4});
    const auto worse = method1_lindblad(2, p, {500.0, 1e4});
    CHECK(better.lindblad > worse.lindblad);
}

TEST_CASE("windowed expectations") {
    std::vector<Sample> s;
    for (int k = 0; k <= 100; ++k) s.push_back({0.1 * k, 0.0, 1.0, 0.0, 1.0});
    const auto w = windowed_expectations(s, 2.0);
    REQUIRE(w.size() == s.size());
    for (const auto& x : w) {
        CHECK(x.na == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(x.q == 0.0);
    }
    const auto raw = windowed_expectations(s, 0.0);
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(raw[k].t == s[k].t);
    CHECK_THROWS_AS(windowed_expectations(s, 20.0), ValidationError);

    // boxcar of a linear ramp is the ramp in the interior
    std::vector<Sample> ramp;
    for (int k = 0; k <= 200; ++k) ramp.push_back({0.05 * k, 0.05 * k, 0.0, 0.0, 1.0});
    const auto wr = windowed_expectations(ramp, 1.0);
    CHECK(wr[100].q == doctest::Approx(ramp[100].q).epsilon(1e-12));
    // a fast oscillation is averaged away
    std::vector<Sample> osc;
    for (int k = 0; k <= 2000; ++k) {
        const double t = 0.01 * k;
        osc.push_back({t, 0.5 + 0.5 * std::cos(2 * kPi * t), 0.0, 0.0, 1.0});
    }
    const auto wo = windowed_expectations(osc, 5.0);
    CHECK(wo[1000].q == doctest::Approx(0.5).epsilon(1e-3));
    // samples sparser than half a window
    std::vector<Sample> sparse{{0.0, 0, 0, 0, 1}, {4.0, 0, 0, 0, 1}, {8.0, 0, 0, 0, 1}};
    CHECK_THROWS_AS(windowed_expectations(sparse, 5.0), ValidationError);
}

TEST_CASE("calibrated NOON schedule, full Hamiltonian") {
    const auto p = full_dynamics_point();
    const auto run = noon_schedule_run(3, p, 0.0, 1.0, 0.05);
    CHECK(run.fidelity >= 0.95);
    CHECK(run.run.max_norm_drift <= 1e-8);
    // bare moments of the final state; the dressed NOON carries a few percent of q = 1
    const auto m = moments(StateVector{ideal_space(noon_program(3, p), 1), run.run.final});
    CHECK(m.na + m.nb == doctest::Approx(3.0).epsilon(0.05));
    CHECK(m.na == doctest::Approx(m.nb).epsilon(0.02));
    CHECK(m.q < 0.05);
    const auto w = windowed_expectations(run.run.samples, 5.0);
    CHECK(w.size() == run.run.samples.size());
    MESSAGE("NOON N=3 fidelity " << run.fidelity);
}

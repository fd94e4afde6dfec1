// End-to-end acceptance run: one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include "fockprog/compiler.hpp"
#include "fockprog/dynamics.hpp"
#include "fockprog/errors.hpp"
#include "fockprog/perturbative.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace fockprog;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Shared between criteria 5 and 8.
struct Hygiene {
    double lindblad_trace = 0.0;
    double lindblad_herm = 0.0;
    double closed_drift = 0.0;
} hygiene;

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
    p.g_a = p.g_b = mhz(100.0);
    p.rabi_omega = mhz(20.0);
    p.t_r = 1e4;
    return p;
}

std::string fmt(const char* f, auto... v) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

AmplitudeTable random_target(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dim(1, 4);
    std::normal_distribution<double> nd;
    const int r = dim(rng), c = dim(rng);
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    m /= m.norm();
    return AmplitudeTable(m);
}

// ---- 1 -------------------------------------------------------------------------------
Outcome compiler_round_trip() {
    const auto t0 = std::chrono::steady_clock::now();
    const SystemParams p = full_dynamics_point();
    std::mt19937_64 rng(20240601);
    double worst = 1.0;
    for (int k = 0; k < 100; ++k) {
        const auto t = random_target(rng);
        const auto prog = synthesize(t, p);
        const auto space = ideal_space(prog);
        worst = std::min(worst, fidelity(run_ideal(prog, basis_state(space, 0, 0, 0)), t.to_state(space)));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {worst >= 1 - 1e-8 && secs < 10.0, fmt("worst 1-F = %.2e over 100 targets, %.2f s", 1 - worst, secs)};
}

// ---- 2 -------------------------------------------------------------------------------
Outcome noon_table() {
    const SystemParams p = full_dynamics_point();
    const auto prog = noon_program(3, p);
    struct Row {
        StepKind kind;
        double theta;
        int n_class;
        std::array<int, 3> s1, s2;  // the two populated states after the step
    };
    const StepKind R = StepKind::rabi, A = StepKind::swap_a, B = StepKind::swap_b;
    const std::vector<Row> table = {
        {R, kPi / 2, 0, {0, 0, 0}, {1, 0, 0}}, {A, kPi / 2, 1, {0, 0, 0}, {0, 1, 0}},
        {R, kPi, 1, {0, 0, 0}, {1, 1, 0}},     {A, kPi / 2, 2, {0, 0, 0}, {0, 2, 0}},
        {R, kPi, 2, {0, 0, 0}, {1, 2, 0}},     {A, kPi / 2, 3, {0, 0, 0}, {0, 3, 0}},
        {R, kPi, 0, {1, 0, 0}, {0, 3, 0}},     {B, kPi / 2, 1, {0, 0, 1}, {0, 3, 0}},
        {R, kPi, -1, {1, 0, 1}, {0, 3, 0}},    {B, kPi / 2, 2, {0, 0, 2}, {0, 3, 0}},
        {R, kPi, -2, {1, 0, 2}, {0, 3, 0}},    {B, kPi / 2, 3, {0, 0, 3}, {0, 3, 0}},
    };
    if (prog.steps.size() != table.size()) return {false, fmt("%zu steps", prog.steps.size())};
    bool seq_ok = true;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& s = prog.steps[i];
        const auto& r = table[i];
        double want_t = 0.0;
        if (r.kind == R) want_t = r.theta / p.rabi_omega;
        else want_t = kPi / (2.0 * (r.kind == A ? p.g_a : p.g_b) * std::sqrt(double(r.n_class)));
        seq_ok = seq_ok && s.kind == r.kind && std::abs(s.theta - r.theta) < 1e-12 && s.n_class == r.n_class &&
                 std::abs(s.duration - want_t) <= 1e-12 * want_t;
    }
    const auto space = ideal_space(prog);
    double worst = 0.0;
    run_ideal(prog, basis_state(space, 0, 0, 0), [&](std::size_t i, const StateVector& st) {
        Eigen::VectorXd want = Eigen::VectorXd::Zero(Eigen::Index(space.dim()));
        want(Eigen::Index(space.index(table[i].s1[0], table[i].s1[1], table[i].s1[2]))) += 0.5;
        want(Eigen::Index(space.index(table[i].s2[0], table[i].s2[1], table[i].s2[2]))) += 0.5;
        worst = std::max(worst, (st.amps.cwiseAbs2() - want).cwiseAbs().maxCoeff());
    });
    return {seq_ok && worst <= 1e-10, fmt("12 steps, sequence %s, population error %.1e", seq_ok ? "matches" : "differs", worst)};
}

// ---- 3 -------------------------------------------------------------------------------
Outcome eighteen_steps() {
    const SystemParams p = full_dynamics_point();
    const auto t = max_entangled_target(3);
    const auto prog = synthesize(t, p);
    std::size_t nontrivial = 0;
    for (const auto& s : prog.steps)
        if (s.theta != 0.0) ++nontrivial;
    const auto space = ideal_space(prog);
    const double f = fidelity(run_ideal(prog, basis_state(space, 0, 0, 0)), t.to_state(space));
    return {nontrivial <= 18 && f >= 1 - 1e-8, fmt("%zu non-trivial steps, 1-F = %.1e", nontrivial, 1 - f)};
}

// ---- 4 -------------------------------------------------------------------------------
Outcome full_dynamics_noon() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto run = noon_schedule_run(3, full_dynamics_point(), 0.0, 1.0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    hygiene.closed_drift = std::max(hygiene.closed_drift, run.run.max_norm_drift);
    const bool ok = run.fidelity >= 0.95 && std::abs(run.fidelity - 0.975) <= 0.02 && secs < 120.0;
    return {ok, fmt("F = %.5f (band 0.975 +- 0.02), 1 ns ramps, %.1f s", run.fidelity, secs)};
}

// ---- 5 -------------------------------------------------------------------------------
Outcome perturbative_vs_numerics() {
    const auto t0 = std::chrono::steady_clock::now();
    const SystemParams p = dissipation_point();
    double worst_gap = 0.0, worst_sigma = 0.0;
    std::ostringstream rows;
    for (double tq : {500.0, 1000.0}) {
        const DecoherenceParams dec{tq, p.t_r};
        for (int n = 1; n <= 4; ++n) {
            const double closed = fidelity_closed(NoonMethod::m1, n, dec, p.rabi_omega, p.g_a);
            const auto lin = method1_lindblad(n, p, dec);
            hygiene.lindblad_trace = std::max(hygiene.lindblad_trace, lin.detail.max_trace_drift);
            hygiene.lindblad_herm = std::max(hygiene.lindblad_herm, lin.detail.max_hermiticity);
            const auto tr = method1_trajectories(n, p, dec, 1024, 7001 + std::uint64_t(n) + std::uint64_t(tq));
            worst_gap = std::max(worst_gap, std::abs(closed - lin.lindblad));
            const double diff = std::abs(tr.mean_fidelity - lin.lindblad);
            const double sig = tr.std_error > 0 ? diff / tr.std_error : (diff == 0 ? 0.0 : kInf);
            worst_sigma = std::max(worst_sigma, sig);
            rows << fmt(" [N=%d Tq=%g: %.4f/%.4f/%.4f]", n, tq, closed, lin.lindblad, tr.mean_fidelity);
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {worst_gap <= 0.02 && worst_sigma <= 3.0 && secs < 300.0,
            fmt("max |closed-Lindblad| = %.4f, max MCWF deviation %.2f sigma, %.0f s;", worst_gap, worst_sigma, secs) +
                rows.str()};
}

// ---- 6 -------------------------------------------------------------------------------
Outcome method_ordering() {
    const SystemParams p = dissipation_point();
    int closed_ok = 0, lin_ok = 0;
    double min_margin = kInf;
    for (int k = 0; k < 20; ++k) {
        const double tq = 300.0 + k * (2000.0 - 300.0) / 19.0;
        const DecoherenceParams dec{tq, p.t_r};
        const double c1 = fidelity_closed(NoonMethod::m1, 4, dec, p.rabi_omega, p.g_a);
        const double c2 = fidelity_closed(NoonMethod::m2, 4, dec, p.rabi_omega, p.g_a);
        const auto l1 = method1_lindblad(4, p, dec);
        const auto l2 = method2_lindblad(4, p, dec);
        hygiene.lindblad_trace = std::max({hygiene.lindblad_trace, l1.detail.max_trace_drift, l2.detail.max_trace_drift});
        hygiene.lindblad_herm = std::max({hygiene.lindblad_herm, l1.detail.max_hermiticity, l2.detail.max_hermiticity});
        closed_ok += c1 > c2;
        lin_ok += l1.lindblad > l2.lindblad;
        min_margin = std::min({min_margin, c1 - c2, l1.lindblad - l2.lindblad});
    }
    return {closed_ok == 20 && lin_ok == 20,
            fmt("M1 > M2 at %d/20 (closed) and %d/20 (Lindblad) points, smallest margin %.4f", closed_ok, lin_ok,
                min_margin)};
}

// ---- 7 -------------------------------------------------------------------------------
Outcome timing_formulas() {
    const SystemParams p = full_dynamics_point();
    double worst_rel = 0.0;
    for (int n = 1; n <= 6; ++n) {
        const auto prog = noon_program(n, p);
        double t = (2.0 * n - 0.5) * kPi / p.rabi_omega;
        for (int j = 1; j <= n; ++j) t += kPi / (2 * p.g_a * std::sqrt(double(j))) + kPi / (2 * p.g_b * std::sqrt(double(j)));
        double sum = 0.0;
        for (const auto& s : prog.steps) sum += step_time(s, prog.rates);
        worst_rel = std::max(worst_rel, std::abs(sum - t) / t);
    }
    std::mt19937_64 rng(77);
    int over = 0;
    double worst_ratio = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto tgt = random_target(rng);
        const auto prog = synthesize(tgt, p);
        const int na = tgt.support_na(), nb = tgt.support_nb();
        double tmax = (na + nb + double(na) * nb) * kPi / p.rabi_omega;
        for (int j = 1; j <= na; ++j) tmax += kPi / (2 * p.g_a * std::sqrt(double(j)));
        for (int j = 1; j <= nb; ++j) tmax += (na + 1) * kPi / (2 * p.g_b * std::sqrt(double(j)));
        const double d = prog.rotation_duration();
        worst_ratio = std::max(worst_ratio, tmax > 0 ? d / tmax : 0.0);
        over += d > tmax * (1 + 1e-12);
    }
    return {worst_rel <= 1e-12 && over == 0,
            fmt("NOON N=1..6 relative error %.1e; 100 random programs, max duration/T_max = %.3f", worst_rel,
                worst_ratio)};
}

// ---- 8 -------------------------------------------------------------------------------
Outcome solver_hygiene() {
    const SystemParams fd = full_dynamics_point();
    const auto a = noon_schedule_run(3, fd, 0.004, 1.0);
    const auto b = noon_schedule_run(3, fd, 0.002, 1.0);
    hygiene.closed_drift = std::max({hygiene.closed_drift, a.run.max_norm_drift, b.run.max_norm_drift});
    const double d_closed = std::abs(a.fidelity - b.fidelity);

    const SystemParams p = dissipation_point();
    const DecoherenceParams dec{500.0, p.t_r};
    EvolveOptions o1, o2;
    o1.dt_max = 0.5;
    o2.dt_max = 0.25;
    const auto l1 = method1_lindblad(3, p, dec, o1);
    const auto l2 = method1_lindblad(3, p, dec, o2);
    hygiene.lindblad_trace = std::max({hygiene.lindblad_trace, l1.detail.max_trace_drift, l2.detail.max_trace_drift});
    hygiene.lindblad_herm = std::max({hygiene.lindblad_herm, l1.detail.max_hermiticity, l2.detail.max_hermiticity});
    const double d_lin = std::abs(l1.lindblad - l2.lindblad);

    const bool ok = hygiene.closed_drift <= 1e-8 && hygiene.lindblad_trace <= 1e-7 && hygiene.lindblad_herm <= 1e-9 &&
                    d_closed <= 1e-6 && d_lin <= 1e-6;
    return {ok, fmt("norm drift %.1e, trace drift %.1e, Hermiticity %.1e, dt halving: schedule %.1e, Lindblad %.1e",
                    hygiene.closed_drift, hygiene.lindblad_trace, hygiene.lindblad_herm, d_closed, d_lin)};
}

// ---- 9 -------------------------------------------------------------------------------
// Direct RK4 integration of the two-state master equation.
std::array<cplx, 4> integrate_master(std::array<cplx, 4> y, double om, double t, const StepRates& r) {
    const cplx i(0.0, 1.0);
    auto f = [&](const std::array<cplx, 4>& x) {
        return std::array<cplx, 4>{
            i * om / 2.0 * (x[1] - x[2]) - r.lambda1 * x[0] + r.lambda12 * x[3],
            i * om / 2.0 * (x[0] - x[3]) - 0.5 * (r.lambda1 + r.lambda2) * x[1],
            i * om / 2.0 * (x[3] - x[0]) - 0.5 * (r.lambda1 + r.lambda2) * x[2],
            i * om / 2.0 * (x[2] - x[1]) - r.lambda2 * x[3],
        };
    };
    const int steps = 4000;
    const double h = t / steps;
    auto add = [](const std::array<cplx, 4>& a, const std::array<cplx, 4>& b, double c) {
        std::array<cplx, 4> o;
        for (int k = 0; k < 4; ++k) o[k] = a[k] + c * b[k];
        return o;
    };
    for (int s = 0; s < steps; ++s) {
        const auto k1 = f(y), k2 = f(add(y, k1, h / 2)), k3 = f(add(y, k2, h / 2)), k4 = f(add(y, k3, h));
        for (int k = 0; k < 4; ++k) y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
    return y;
}

Outcome appendix_engine() {
    // rate rows, exact
    bool rows_ok = true;
    const DecoherenceParams d{700.0, 9000.0};
    const double q = 1.0 / 700.0, r = 1.0 / 9000.0;
    for (int n = 0; n <= 6; ++n) {
        auto same = [&](const StepRates& s, double l1, double l2, double l12) {
            return std::abs(s.lambda1 - l1) <= 1e-15 && std::abs(s.lambda2 - l2) <= 1e-15 &&
                   std::abs(s.lambda12 - l12) <= 1e-15;
        };
        rows_ok = rows_ok && same(rates_for(DecayOp::R01, n, d), n * r, q + n * r, q) &&
                  same(rates_for(DecayOp::R12, n, d), q + n * r, 2 * q + n * r, 2 * q) &&
                  same(rates_for(DecayOp::A1, n, d), (n + 1) * r, q + n * r, 0.0) &&
                  same(rates_for(DecayOp::A2, n, d), q + (n + 1) * r, 2 * q + n * r, 0.0);
    }

    // map vs master equation at largest rate / Omega = 0.01, one pi pulse
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    const double om = mhz(20.0), t = kPi / om;
    double worst = 0.0;
    std::string where;
    for (DecayOp op : {DecayOp::R01, DecayOp::R12, DecayOp::A1, DecayOp::A2}) {
        for (int n = 0; n <= 3; ++n) {
            StepRates s = rates_for(op, n, {1.0, 10.0});
            const double scale = 0.01 * om / std::max({s.lambda1, s.lambda2, s.lambda12});
            s.lambda1 *= scale;
            s.lambda2 *= scale;
            s.lambda12 *= scale;
            for (int k = 0; k < 25; ++k) {
                Eigen::Vector2cd v(cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng)));
                v.normalize();
                TwoStateRho rho;
                rho.rho11 = std::norm(v(0));
                rho.rho22 = std::norm(v(1));
                rho.rho12 = v(0) * std::conj(v(1));
                rho.rho21 = std::conj(rho.rho12);
                const auto m = two_state_step(rho, om, t, s);
                const auto x = integrate_master({rho.rho11, rho.rho12, rho.rho21, rho.rho22}, om, t, s);
                const double e = std::max({std::abs(m.rho11 - x[0]), std::abs(m.rho12 - x[1]), std::abs(m.rho21 - x[2]),
                                           std::abs(m.rho22 - x[3])});
                if (e > worst) {
                    worst = e;
                    where = to_string(op) + " n=" + std::to_string(n);
                }
            }
        }
    }
    return {rows_ok && worst <= 1e-3,
            fmt("rate rows %s; map vs master equation max element error %.2e (%s)", rows_ok ? "exact" : "differ", worst,
                where.c_str())};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {"1 compiler round trip", compiler_round_trip},
        {"2 NOON(3) program and population trace", noon_table},
        {"3 eighteen-step maximally entangled state", eighteen_steps},
        {"4 full-dynamics NOON(3) fidelity", full_dynamics_noon},
        {"5 closed form vs Lindblad vs trajectories", perturbative_vs_numerics},
        {"6 method ordering at N=4", method_ordering},
        {"7 timing formulas", timing_formulas},
        {"8 solver hygiene", solver_hygiene},
        {"9 two-state engine", appendix_engine},
    };
    int failed = 0;
    for (const auto& c : all) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed;
}

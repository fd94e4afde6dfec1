#include "fockprog/perturbative.hpp"
#include "fockprog/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fockprog {

namespace {

constexpr double kPi = std::numbers::pi;

void check_order(int n) {
    if (n < 1) throw ValidationError("NOON order must be >= 1");
}

void check_rates(double omega, double g) {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw ValidationError("Rabi rate must be > 0");
    if (!(g > 0.0) || !std::isfinite(g)) throw ValidationError("coupling must be > 0");
}

// Population carried across one complete two-state transfer (Omega t = pi).
double transfer(DecayOp op, int n, const DecoherenceParams& dec, double t) {
    TwoStateRho rho;
    rho.rho11 = 1.0;
    const auto out = two_state_step(rho, kPi / t, t, rates_for(op, n, dec));
    return out.rho22;
}

// A coherence between one of the two rotating states and a state outside the pair.
double spectator_coherence(DecayOp op, int n, const DecoherenceParams& dec, double t) {
    const StepRates r = rates_for(op, n, dec);
    return std::exp(-(r.lambda1 + r.lambda2) * t / 4.0);
}

}  // namespace

std::string to_string(DecayOp op) {
    switch (op) {
        case DecayOp::R01: return "R01";
        case DecayOp::R12: return "R12";
        case DecayOp::A1: return "A1";
        case DecayOp::A2: return "A2";
    }
    return "?";
}

DecayOp parse_decay_op(const std::string& s) {
    if (s == "R01") return DecayOp::R01;
    if (s == "R12") return DecayOp::R12;
    if (s == "A1") return DecayOp::A1;
    if (s == "A2") return DecayOp::A2;
    throw ValidationError("unknown operation '" + s + "' (expected R01, R12, A1 or A2)");
}

StepRates rates_for(DecayOp op, int n, const DecoherenceParams& dec) {
    if (n < 0) throw ValidationError("photon number must be >= 0");
    const double q = dec.gamma_q(), r = dec.gamma_r();
    switch (op) {
        case DecayOp::R01: return {n * r, q + n * r, q};
        case DecayOp::R12: return {q + n * r, 2.0 * q + n * r, 2.0 * q};
        case DecayOp::A1: return {(n + 1) * r, q + n * r, 0.0};
        case DecayOp::A2: return {q + (n + 1) * r, 2.0 * q + n * r, 0.0};
    }
    throw ValidationError("unknown operation");
}

TwoStateCoefficients two_state_coefficients(double omega, double t, const StepRates& r) {
    const double slow = std::exp(-(2.0 * r.lambda1 + 2.0 * r.lambda2 + r.lambda12) * t / 4.0);
    const double ca = 0.5 * std::exp(-(r.lambda1 + r.lambda2 - r.lambda12) * t / 2.0);
    const double cc = 0.5 * std::exp(-(r.lambda1 + r.lambda2) * t / 2.0);
    const double cs = std::cos(omega * t), sn = std::sin(omega * t);
    TwoStateCoefficients k;
    k.a_plus = ca + 0.5 * slow * cs;
    k.a_minus = ca - 0.5 * slow * cs;
    k.b = 0.5 * slow * sn;
    k.c_plus = cc + 0.5 * slow * cs;
    k.c_minus = cc - 0.5 * slow * cs;
    return k;
}

TwoStateRho two_state_step(const TwoStateRho& rho, double omega, double t, const StepRates& r) {
    const auto k = two_state_coefficients(omega, t, r);
    const cplx ib(0.0, k.b);
    TwoStateRho out;
    out.rho11 = (k.a_plus * rho.rho11 + k.a_minus * rho.rho22 + ib * (rho.rho12 - rho.rho21)).real();
    out.rho22 = (k.a_plus * rho.rho22 + k.a_minus * rho.rho11 + ib * (rho.rho21 - rho.rho12)).real();
    out.rho12 = k.c_plus * rho.rho12 + k.c_minus * rho.rho21 + ib * (rho.rho11 - rho.rho22);
    out.rho21 = k.c_plus * rho.rho21 + k.c_minus * rho.rho12 + ib * (rho.rho22 - rho.rho11);
    return out;
}

double perturbative_ratio(double omega, const StepRates& r) {
    return std::max({r.lambda1, r.lambda2, r.lambda12}) / std::abs(omega);
}

std::string to_string(NoonMethod m) { return m == NoonMethod::m1 ? "m1" : "m2"; }

NoonMethod parse_method(const std::string& s) {
    if (s == "m1" || s == "M1") return NoonMethod::m1;
    if (s == "m2" || s == "M2") return NoonMethod::m2;
    throw ValidationError("unknown method '" + s + "' (expected m1 or m2)");
}

double m1_swap_time(int n, double g) {
    if (n < 1) throw ValidationError("swap index must be >= 1");
    return kPi / (2.0 * g * std::sqrt(double(n)));
}

double m2_swap_time(int n, int n_total, double g) {
    if (n < 1 || n > n_total) throw ValidationError("swap index out of range");
    if (n == n_total) return kPi / (2.0 * std::sqrt(double(n_total)) * g);
    return kPi / (2.0 * std::sqrt(2.0 * n) * g);
}

NoonRho method1_rho(int n, const DecoherenceParams& dec, double omega, double g) {
    return method1_rho(n, dec, omega, g, g);
}

NoonRho method1_rho(int n, const DecoherenceParams& dec, double omega, double g_a, double g_b) {
    check_order(n);
    check_rates(omega, g_a);
    check_rates(omega, g_b);
    dec.validate();
    const double dt = kPi / omega;

    // (A R)^N: |00> stays put, the excited branch climbs |0,k> in mode a.
    // The opening pi/2 pulse is taken as lossless.
    const double r00 = 0.5;
    double r11 = 0.5, r01 = 0.5;
    for (int k = 1; k <= n; ++k) {
        if (k > 1) {
            r11 *= transfer(DecayOp::R01, k - 1, dec, dt);
            r01 *= spectator_coherence(DecayOp::R01, k - 1, dec, dt);
        }
        const double ts = m1_swap_time(k, g_a);
        r11 *= transfer(DecayOp::A1, k - 1, dec, ts);
        r01 *= spectator_coherence(DecayOp::A1, k - 1, dec, ts);
    }

    // (B R)^N on the |000> branch while |0,N,0> idles and decays.
    double bb = r00, ab = r01, span = 0.0;
    for (int k = 1; k <= n; ++k) {
        bb *= transfer(DecayOp::R01, k - 1, dec, dt);
        ab *= spectator_coherence(DecayOp::R01, k - 1, dec, dt);
        const double ts = m1_swap_time(k, g_b);
        bb *= transfer(DecayOp::A1, k - 1, dec, ts);
        ab *= spectator_coherence(DecayOp::A1, k - 1, dec, ts);
        span += dt + ts;
    }
    const double idle = n * dec.gamma_r() * span;
    NoonRho out;
    out.rho_aa = r11 * std::exp(-idle);
    out.rho_bb = bb;
    out.rho_ab = out.rho_ba = ab * std::exp(-0.5 * idle);
    return out;
}

double method2_bell_factor(const DecoherenceParams& dec, double omega, double g) {
    check_rates(omega, g);
    dec.validate();
    const double dt = kPi / omega, dt0 = kPi / (4.0 * g);
    return transfer(DecayOp::R01, 0, dec, dt) * std::exp(-dt0 * dec.gamma_q());
}

NoonRho method2_rho(int n, const DecoherenceParams& dec, double omega, double g) {
    check_order(n);
    const double p = method2_bell_factor(dec, omega, g);
    const double dt = kPi / omega;
    // r00: |0,1,0,k>, r11: |1,0,k,0>; both branches rotate and swap together,
    // so a coherence picks up the spectator factor once per side.
    double r00 = 0.5 * p, r11 = 0.5 * p, r01 = 0.5 * p;
    for (int k = 0; k + 1 < n; ++k) {
        const double rot = transfer(DecayOp::R12, k, dec, dt);
        r00 *= rot;
        r11 *= rot;
        r01 *= std::pow(spectator_coherence(DecayOp::R12, k, dec, dt), 2);
        const double ts = m2_swap_time(k + 1, n, g);
        const double sw = transfer(DecayOp::A2, k, dec, ts);
        r00 *= sw;
        r11 *= sw;
        r01 *= std::pow(spectator_coherence(DecayOp::A2, k, dec, ts), 2);
    }
    const double tl = m2_swap_time(n, n, g);
    const double last = transfer(DecayOp::A1, n - 1, dec, tl);
    NoonRho out;
    out.rho_aa = r11 * last;
    out.rho_bb = r00 * last;
    out.rho_ab = out.rho_ba = r01 * std::pow(spectator_coherence(DecayOp::A1, n - 1, dec, tl), 2);
    return out;
}

double fidelity_from_rho(const NoonRho& r) { return 0.5 * (r.rho_aa + r.rho_ab + r.rho_ba + r.rho_bb); }

double fidelity_closed(NoonMethod m, int n, const DecoherenceParams& dec, double omega, double g) {
    check_order(n);
    check_rates(omega, g);
    dec.validate();
    const double q = dec.gamma_q(), r = dec.gamma_r();
    const double dt = kPi / omega, N = n;
    if (m == NoonMethod::m1) {
        double sum = 0.0;
        for (int k = 1; k <= n; ++k) sum += m1_swap_time(k, g) * (q + (2.0 * k + N - 1.0) * r);
        return std::exp(-7.0 / 16.0 * (N - 0.5) * dt * q - N * (N - 0.5) * dt * r) * std::exp(-0.5 * sum);
    }
    double sum = 0.0;
    for (int k = 1; k <= n - 1; ++k) sum += m2_swap_time(k, n, g) * (3.0 * q + (2.0 * k - 1.0) * r);
    const double dt0 = kPi / (4.0 * g), dtn = m2_swap_time(n, n, g);
    return std::exp(-11.0 / 8.0 * (N - 8.0 / 11.0) * dt * q - 0.5 * (N - 1.0) * (N - 2.0) * dt * r) *
           std::exp(-0.5 * sum) * std::exp(-0.5 * dt0 * q - 0.5 * dtn * (q + (2.0 * N - 1.0) * r));
}

double method_duration(NoonMethod m, int n, double omega, double g) {
    check_order(n);
    check_rates(omega, g);
    const double dt = kPi / omega;
    double swaps = 0.0;
    for (int k = 1; k <= n; ++k) swaps += m == NoonMethod::m1 ? m1_swap_time(k, g) : m2_swap_time(k, n, g);
    return m == NoonMethod::m1 ? 2.0 * n * dt + 2.0 * swaps : n * dt + swaps;
}

double fidelity_rough(NoonMethod m, int n, const DecoherenceParams& dec, double omega, double g) {
    dec.validate();
    const double t = method_duration(m, n, omega, g);
    const double kq = m == NoonMethod::m1 ? 7.0 / 32.0 : 11.0 / 8.0;
    return std::exp(-kq * t * dec.gamma_q() - 0.5 * n * t * dec.gamma_r());
}

std::vector<SweepPoint> sweep_n(int n_max, const DecoherenceParams& dec, double omega, double g) {
    check_order(n_max);
    std::vector<SweepPoint> out;
    for (int n = 1; n <= n_max; ++n) {
        SweepPoint s;
        s.n = n;
        s.t_q = dec.t_q;
        s.t_r = dec.t_r;
        s.f_m1 = fidelity_closed(NoonMethod::m1, n, dec, omega, g);
        s.f_m2 = fidelity_closed(NoonMethod::m2, n, dec, omega, g);
        s.f_m1_rho = fidelity_from_rho(method1_rho(n, dec, omega, g));
        s.f_m2_rho = fidelity_from_rho(method2_rho(n, dec, omega, g));
        out.push_back(s);
    }
    return out;
}

std::vector<SweepPoint> sweep_tq(int n, const std::vector<double>& t_q, double t_r, double omega, double g) {
    std::vector<SweepPoint> out;
    for (double tq : t_q) {
        auto row = sweep_n(n, {tq, t_r}, omega, g).back();
        out.push_back(row);
    }
    return out;
}

}  // namespace fockprog

#pragma once

// First-order decoherence of two-state rotations and the resulting NOON
// density matrices / fidelities for the two preparation methods:
//   M1: one qubit, [B R01(pi)]^N [A R01(pi)]^(N-1) A R01(pi/2)
//   M2: two qutrits, Bell pair then A1 B1 [A2 B2 R12a R12b]^(N-1)
// All rates are 1/ns, times ns, omega and g in rad/ns.

#include "fockprog/hilbert.hpp"
#include "fockprog/model.hpp"

#include <string>
#include <vector>

namespace fockprog {

// Populations of the two states and their coherences.
struct TwoStateRho {
    double rho11 = 0.0;
    double rho22 = 0.0;
    cplx rho12{};
    cplx rho21{};
};

struct StepRates {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda12 = 0.0;  // feeding from state 2 into state 1
};

enum class DecayOp { R01, R12, A1, A2 };
std::string to_string(DecayOp op);
DecayOp parse_decay_op(const std::string& s);  // "R01", "R12", "A1", "A2"

// Rates for the pair the operation rotates, n photons in the active resonator
// (state 1 / state 2):
//   R01 |0,n>   / |1,n>    A1 |0,n+1> / |1,n>
//   R12 |1,n>   / |2,n>    A2 |1,n+1> / |2,n>
StepRates rates_for(DecayOp op, int n, const DecoherenceParams& dec);

struct TwoStateCoefficients {
    double a_plus = 0.0, a_minus = 0.0, b = 0.0, c_plus = 0.0, c_minus = 0.0;
};
TwoStateCoefficients two_state_coefficients(double omega, double t, const StepRates& r);

// The first-order map for rotation rate omega over time t.
TwoStateRho two_state_step(const TwoStateRho& rho, double omega, double t, const StepRates& r);

// Largest rate / omega; the expansion is only trusted well below ~0.1.
double perturbative_ratio(double omega, const StepRates& r);

// Phase-stripped NOON density matrix on {|N,0>, |0,N>}.
struct NoonRho {
    double rho_aa = 0.0;
    double rho_ab = 0.0;
    double rho_ba = 0.0;
    double rho_bb = 0.0;
};

enum class NoonMethod { m1, m2 };
std::string to_string(NoonMethod m);
NoonMethod parse_method(const std::string& s);  // "m1" / "m2"

// Propagates the recursion step by step from rates_for and two_state_step.
NoonRho method1_rho(int n, const DecoherenceParams& dec, double omega, double g);
NoonRho method1_rho(int n, const DecoherenceParams& dec, double omega, double g_a, double g_b);
NoonRho method2_rho(int n, const DecoherenceParams& dec, double omega, double g);

// Bell-pair survival for M2: (1 + e^{-3 dt/4Tq}) e^{-dt0/Tq} / 2.
double method2_bell_factor(const DecoherenceParams& dec, double omega, double g);

double fidelity_from_rho(const NoonRho& rho);
// The regrouped exponential forms.
double fidelity_closed(NoonMethod m, int n, const DecoherenceParams& dec, double omega, double g);
// Rough single-exponential forms, e^{-(7/32) T/Tq - N T/(2Tr)} and e^{-(11/8) T/Tq - N T/(2Tr)}.
double fidelity_rough(NoonMethod m, int n, const DecoherenceParams& dec, double omega, double g);

// Sequence durations: M1 = 2 N dt + 2 sum dt_n, M2 = N dt + sum dt_n (per-method dt_n).
double method_duration(NoonMethod m, int n, double omega, double g);
// Swap times: M1 pi/(2 g sqrt n); M2 pi/(2 g sqrt(2n)) for n < N, pi/(2 g sqrt N) at n = N.
double m1_swap_time(int n, double g);
double m2_swap_time(int n, int n_total, double g);

struct SweepPoint {
    int n = 0;
    double t_q = 0.0;
    double t_r = 0.0;
    double f_m1 = 0.0;  // closed forms
    double f_m2 = 0.0;
    double f_m1_rho = 0.0;  // recursion then fidelity_from_rho
    double f_m2_rho = 0.0;
};
std::vector<SweepPoint> sweep_n(int n_max, const DecoherenceParams& dec, double omega, double g);
std::vector<SweepPoint> sweep_tq(int n, const std::vector<double>& t_q, double t_r, double omega, double g);

}  // namespace fockprog

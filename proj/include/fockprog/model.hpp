#pragma once

// Physical model. Internal units: time in ns, frequencies in rad/ns.
// Parameter files carry linear GHz / MHz and are converted on load.

#include "fockprog/hilbert.hpp"

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace fockprog {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr double ghz(double f) { return kTwoPi * f; }
inline constexpr double mhz(double f) { return kTwoPi * f * 1e-3; }
inline constexpr double to_ghz(double w) { return w / kTwoPi; }
inline constexpr double to_mhz(double w) { return w / kTwoPi * 1e3; }

struct SystemParams {
    double omega_q = ghz(7.0);   // idle 0<->1 splitting
    double omega_12 = ghz(6.6);  // qutrit 1<->2 splitting
    double omega_a = ghz(6.3);
    double omega_b = ghz(7.7);
    double g_a = mhz(70.0);
    double g_b = mhz(70.0);
    double rabi_omega = mhz(20.0);
    double t_q = kInf;  // ns
    double t_r = kInf;  // ns
    double shift_omega = mhz(100.0);  // qubit excursion used by phase-shift pulses

    // Throws ValidationError on non-positive values; returns dispersive-regime warnings.
    std::vector<std::string> validate() const;
    std::uint64_t hash() const;
};

// Amplitude damping of the atom (sigma_-) and of each resonator. Infinite
// times switch the channel off.
struct DecoherenceParams {
    double t_q = kInf;  // ns
    double t_r = kInf;  // ns

    static DecoherenceParams from(const SystemParams& p) { return {p.t_q, p.t_r}; }
    double gamma_q() const { return std::isinf(t_q) ? 0.0 : 1.0 / t_q; }
    double gamma_r() const { return std::isinf(t_r) ? 0.0 : 1.0 / t_r; }
    bool lossless() const { return gamma_q() == 0.0 && gamma_r() == 0.0; }
    void validate() const;  // throws ValidationError unless both are > 0
};

SystemParams parse_params(std::istream& in);
SystemParams load_params(const std::string& path);
void write_params(std::ostream& out, const SystemParams& p);

enum class AddressingRule { difference, sum };
std::string to_string(AddressingRule r);
AddressingRule parse_rule(const std::string& s);

// Stark class of a Fock pair under the rule.
inline int stark_class(AddressingRule r, int na, int nb) {
    return r == AddressingRule::difference ? na - nb : na + nb;
}

struct DispersiveMap {
    double delta_omega = 0.0;
    double delta_omega_0 = 0.0;  // three-level offset, zero for two levels
    AddressingRule rule = AddressingRule::difference;
};

// Two levels: difference rule, delta_omega = 2 g_a^2/(w_q - w_a).
// Three levels: sum rule, offsets read off qutrit_drive_frequency.
DispersiveMap make_dispersive_map(const SystemParams& p, int atom_levels);

Operator static_hamiltonian(const HilbertSpace& space, const SystemParams& p, double omega_q_now,
                            double frame_omega = 0.0);
// Drive on the 0<->1 transition: (amp/2)[e^{-i(w_d t + phase)} sigma+ + h.c.]
Operator drive_term(const HilbertSpace& space, double amplitude, double drive_freq, double phase,
                    double t);
// |1><0| restricted to the 0<->1 transition (no qutrit 1<->2 element)
Operator sigma_plus_01(const HilbertSpace& space);

// Second-order energies of the two-level model.
double dispersive_energy(const SystemParams& p, int q, int na, int nb);
// General two-level drive frequency for |0,na,nb> -> |1,na,nb>.
double transition_frequency(const SystemParams& p, int na, int nb);
// Requires g_a^2/(w_q-w_a) = g_b^2/(w_b-w_q) within 1e-6 relative for two levels.
double drive_frequency(const SystemParams& p, const DispersiveMap& map, int n);
double qutrit_drive_frequency(const SystemParams& p, int na, int nb);
// Per-photon shifts (rad/ns) of the qutrit 0<->1 line from modes a and b.
double qutrit_shift_a(const SystemParams& p);
double qutrit_shift_b(const SystemParams& p);
// Warnings about the w_a < w_12 < w_01 < w_b ordering.
std::vector<std::string> qutrit_ordering_warnings(const SystemParams& p);

struct SymmetricShift {
    double shift_a = 0.0;  // g_a^2/(w_q - w_a)
    double shift_b = 0.0;  // g_b^2/(w_b - w_q)
    bool holds = false;
};
SymmetricShift symmetric_shift(const SystemParams& p, double rel_tol = 1e-6);

// Exact eigenstates, diagonalized block by block in total excitation number
// (the coupling conserves it), each eigenvector tagged with the bare label it
// overlaps most (greedy maximum-overlap assignment).
struct DressedSpectrum {
    HilbertSpace space;
    Eigen::VectorXd energies;      // indexed by bare basis index
    Matrix vectors;                // column i is the dressed partner of bare state i
    double energy(int q, int na, int nb) const {
        return energies(static_cast<Eigen::Index>(space.index(q, na, nb)));
    }
    StateVector state(int q, int na, int nb) const;
};

DressedSpectrum dressed_spectrum(const HilbertSpace& space, const SystemParams& p,
                                 double omega_q_now, double frame_omega = 0.0);

}  // namespace fockprog

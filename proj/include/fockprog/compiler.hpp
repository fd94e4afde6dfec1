#pragma once

// Pulse programs: ideal two-state operations and the inverse-evolution compiler.

#include "fockprog/hilbert.hpp"
#include "fockprog/model.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace fockprog {

enum class StepKind { rabi, swap_a, swap_b, phase_shift };

std::string_view kind_token(StepKind k);
StepKind parse_kind(std::string_view token);

// For Rabi steps theta is the rotation angle (Omega t) and n_class the Stark class.
// For swaps theta is the ladder angle sqrt(n) g t at ladder n = n_class, so
// theta = pi/2 transfers one quantum completely.
// For phase shifts theta is the requested phase phi: q=1 amplitudes pick up
// e^{-i phi}; alpha = beta = phi/2 in the symmetric convention.
struct PulseStep {
    StepKind kind = StepKind::rabi;
    double theta = 0.0;
    int n_class = 0;
    double drive_phase = 0.0;
    double phase_alpha = 0.0;
    double phase_beta = 0.0;
    double duration = 0.0;  // ns

    friend bool operator==(const PulseStep&, const PulseStep&) = default;
};

// Rates a program was compiled for (rad/ns).
struct ProgramRates {
    double rabi = 0.0;
    double g_a = 0.0;
    double g_b = 0.0;
    double shift = 0.0;
    static ProgramRates from(const SystemParams& p) { return {p.rabi_omega, p.g_a, p.g_b, p.shift_omega}; }
    friend bool operator==(const ProgramRates&, const ProgramRates&) = default;
};

// c(na, nb): amplitudes of |0, na, nb>.
class AmplitudeTable {
public:
    AmplitudeTable() : c_(Matrix::Zero(1, 1)) {}
    explicit AmplitudeTable(Matrix c) : c_(std::move(c)) {}
    static AmplitudeTable from_state(const StateVector& s);  // requires q = 0 only

    // Support: largest n_a / n_b carrying |c| > tol.
    int support_na(double tol = 0.0) const;
    int support_nb(double tol = 0.0) const;
    cplx operator()(int na, int nb) const;
    void set(int na, int nb, cplx v);
    double norm_sq() const { return c_.squaredNorm(); }
    const Matrix& matrix() const { return c_; }
    StateVector to_state(const HilbertSpace& space) const;

    friend bool operator==(const AmplitudeTable&, const AmplitudeTable&) = default;

private:
    Matrix c_;
};

AmplitudeTable noon_target(int n);
AmplitudeTable max_entangled_target(int n);
// "noon(N)", "max-entangled(N)" or "inline:{(na,nb):re[+/-im i], ...}"
AmplitudeTable parse_target(const std::string& spec);

// Wall time of a step: a Rabi step with alpha != 0 carries a shift pulse of
// 2|alpha|/shift right after the drive.
double step_time(const PulseStep& s, const ProgramRates& r);

struct PulseProgram {
    std::vector<PulseStep> steps;
    AmplitudeTable target;
    int atom_levels = 2;
    AddressingRule rule = AddressingRule::difference;
    ProgramRates rates;
    std::uint64_t params_hash = 0;

    double duration() const;  // sum of step_time
    // Rabi + swap time only (shift pulses excluded).
    double rotation_duration() const;
    std::size_t count(StepKind k) const;
    int max_na() const;  // largest Fock index of mode a the program touches
    int max_nb() const;
};

// Ideal maps (interaction picture, perfect selectivity).
void apply_rabi_ideal(StateVector& s, AddressingRule rule, int n_class, double theta, double alpha,
                      double beta, double phi);
StateVector apply_rabi_ideal(const StateVector& s, int n_class, double theta, double alpha,
                             double beta, double phi,
                             AddressingRule rule = AddressingRule::difference);
void apply_swap_angle(StateVector& s, Mode mode, double g_t);
StateVector apply_swap_ideal(const StateVector& s, Mode mode, double duration, double g);
void apply_phase_ideal(StateVector& s, double phi);
void apply_step_ideal(StateVector& s, const PulseStep& step, AddressingRule rule,
                      const ProgramRates& rates);
// The inverse of a step (theta -> -theta or phi -> -phi).
void apply_step_inverse(StateVector& s, const PulseStep& step, AddressingRule rule,
                        const ProgramRates& rates);

struct SynthesisOptions {
    AddressingRule rule = AddressingRule::difference;
    int atom_levels = 2;
    double zero_tol = 1e-12;
    int na_limit = -1;  // truncation the program must fit in; -1 = unlimited
    int nb_limit = -1;
};

PulseProgram synthesize(const AmplitudeTable& target, const SystemParams& params,
                        const SynthesisOptions& opts = {});
PulseProgram noon_program(int n, const SystemParams& params, int truncation = -1);

StateVector run_ideal(const PulseProgram& program, const StateVector& initial);
// Callback after every step (for population traces).
StateVector run_ideal(const PulseProgram& program, const StateVector& initial,
                      const std::function<void(std::size_t, const StateVector&)>& after_step);

// Smallest space that holds a program's ideal evolution.
HilbertSpace ideal_space(const PulseProgram& program, int guard = 0);

struct ProgramBounds {
    double t_max = 0.0;
    double t_noon = 0.0;
    double program_duration = 0.0;  // only when a program was given
};
double t_max_bound(int na, int nb, const ProgramRates& r);
double t_noon_bound(int n, const ProgramRates& r);
ProgramBounds program_bounds(int na, int nb, const ProgramRates& r);
ProgramBounds program_bounds(const PulseProgram& program);
// The Rabi+swap pair bound 2 N_max (N_max + 1).
std::size_t step_pair_bound(int n_max);

void write_program(std::ostream& out, const PulseProgram& program);
PulseProgram read_program(std::istream& in);
void save_program(const std::string& path, const PulseProgram& program);
PulseProgram load_program(const std::string& path);

}  // namespace fockprog

#pragma once

// Time-domain side: control schedules, calibration against the dressed
// spectrum, and closed / Lindblad / quantum-trajectory evolution.
//
// Every evolution runs on a PiecewiseHamiltonian: a list of time segments,
// each with a set of dense terms and an optional coefficient callback.
// Schedules, ideal programs and the two-qutrit NOON model all compile to it.

#include "fockprog/compiler.hpp"
#include "fockprog/hilbert.hpp"
#include "fockprog/integrator.hpp"
#include "fockprog/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace fockprog {

// ---- schedules ----------------------------------------------------------------------

struct DriveSpec {
    double amplitude = 0.0;  // Omega_0, rad/ns
    double frequency = 0.0;  // omega_d, rad/ns
    double phase = 0.0;      // delta, referenced to a carrier running from t = 0
};

// omega_q(t) sits at omega_q_idle outside the segment; inside it rises to
// `omega_q` over `ramp` ns with a raised-cosine edge and falls back the same way.
struct ScheduleSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    double omega_q = 0.0;
    double ramp = 0.0;
    std::optional<DriveSpec> drive;
    StepKind kind = StepKind::rabi;
    std::size_t step = 0;  // program step that produced it
};

struct ControlSchedule {
    double omega_q_idle = 0.0;
    std::vector<ScheduleSegment> segments;

    double span() const { return segments.empty() ? 0.0 : segments.back().t_end - segments.front().t_start; }
    void validate() const;  // contiguous, increasing, ramps fit
};

double segment_omega_q(const ScheduleSegment& seg, double omega_q_idle, double t);

struct ScheduleOptions {
    double ramp_ns = 0.0;  // 0 = rectangular shift pulses
    bool calibrate = false;
    int guard = 1;  // extra Fock levels in the calibration space
    // With calibration: each Rabi step may run slower than the program rate so
    // that populated spectator classes (from the ideal trace) end the pulse
    // unexcited.
    bool selective_rates = true;
};

ControlSchedule schedule_from_program(const PulseProgram& program, const SystemParams& params,
                                      const ScheduleOptions& opts = {});

// ---- calibration --------------------------------------------------------------------

struct StepCalibration {
    // Rabi: drive frequency, amplitude and phase offset of the dressed matrix element.
    double frequency = 0.0;
    double amplitude = 0.0;
    double phase_offset = 0.0;
    // Swaps: plateau qubit frequency.
    double omega_q = 0.0;
    double duration = 0.0;  // total segment length, ramps included
    double rate = 0.0;      // Rabi: effective rate Omega on the primary pair
    // Relative to the uncalibrated (perturbative) values.
    double frequency_shift = 0.0;
    double amplitude_factor = 1.0;
    double duration_factor = 1.0;
};

// Rabi: exact dressed transition of the class's primary pair, amplitude scaled by
// |<D1|sigma+|D0>|; `rate` overrides the program's Rabi rate when > 0. Swaps: qubit parked at the minimum avoided-crossing gap,
// duration 2 theta / gap (plateau refined numerically when ramps are on).
// Throws ValidationError if the dressed line is more than 5 delta_omega away.
StepCalibration calibrate_step(const PulseStep& step, const SystemParams& params,
                               const HilbertSpace& space, AddressingRule rule, double ramp_ns = 0.0,
                               double rate = 0.0);

// Largest rate <= max_rate (searched down to max_rate/10) minimizing the
// two-level excitation of every populated off-class Fock pair in `before`
// during a Rabi step at its calibrated frequency. Returns {rate, leakage}.
std::pair<double, double> selective_rate(const PulseStep& step, const StateVector& before,
                                         const SystemParams& params, AddressingRule rule, double max_rate);

// The Fock pair a Rabi class is calibrated on.
BasisLabel primary_pair(AddressingRule rule, int n_class);

// ---- piecewise Hamiltonians ---------------------------------------------------------

using CoeffFn = std::function<void(double t, cplx* out)>;

struct PiecewiseHamiltonian {
    struct Segment {
        double t0 = 0.0;
        double t1 = 0.0;
        std::size_t set = 0;
        CoeffFn coeffs;  // empty: every term weighted 1
        std::size_t step = 0;
    };
    std::size_t dim = 0;
    std::vector<std::vector<Matrix>> term_sets;
    std::vector<Segment> segments;

    double t_begin() const { return segments.empty() ? 0.0 : segments.front().t0; }
    double t_end() const { return segments.empty() ? 0.0 : segments.back().t1; }
    // Append a constant-generator segment of the given length.
    void push_constant(const Matrix& h, double duration, std::size_t step = 0);
};

// Rotating frame at the idle qubit frequency times the excitation number.
PiecewiseHamiltonian schedule_hamiltonian(const ControlSchedule& schedule, const SystemParams& params,
                                          const HilbertSpace& space);
// Each step as its resonant generator only, couplings switched on per step.
PiecewiseHamiltonian ideal_hamiltonian(const PulseProgram& program, const HilbertSpace& space);

std::vector<Matrix> collapse_operators(const HilbertSpace& space, const DecoherenceParams& dec);

// Diagonal observables sampled along a run.
struct Observables {
    Eigen::VectorXd q, na, nb;
};
Observables observables(const HilbertSpace& space);

struct Sample {
    double t = 0.0;
    double q = 0.0;
    double na = 0.0;
    double nb = 0.0;
    double norm = 0.0;  // |psi|^2 or tr rho
};

struct EvolveOptions {
    double dt_max = 0.0;  // ns, 0 = unbounded
    double rtol = 0.0;    // 0 = engine default
    double atol = 0.0;
    double sample_every = -1.0;  // ns; < 0 no samples, 0 every accepted step
    bool check_positivity = true;
    unsigned threads = 0;  // trajectories; 0 = hardware concurrency
};

// Closed runs are held tighter than the others: a full NOON schedule takes
// ~1e5 steps and the norm drift accumulates.
inline constexpr double kClosedRtol = 1e-11;
inline constexpr double kClosedAtol = 1e-14;
inline constexpr double kLindbladRtol = 1e-8;
inline constexpr double kTrajectoryRtol = 1e-8;

struct PropagationResult {
    Vector final;
    std::vector<Sample> samples;
    double max_norm_drift = 0.0;
    OdeStats stats;
};

struct LindbladResult {
    Matrix final;
    std::vector<Sample> samples;
    double max_trace_drift = 0.0;
    double max_hermiticity = 0.0;  // max |rho - rho^dagger| element
    double min_eigenvalue = 0.0;   // smallest seen at segment ends
    OdeStats stats;
};

struct TrajectoryResult {
    double mean_fidelity = 0.0;
    double std_error = 0.0;  // sample std / sqrt(n_traj)
    std::size_t n_traj = 0;
    std::uint64_t seed = 0;
    std::size_t jumps = 0;
    std::vector<double> fidelities;  // per trajectory, index order
};

PropagationResult propagate(const PiecewiseHamiltonian& h, const Vector& psi0, const EvolveOptions& opts = {},
                            const Observables* obs = nullptr);
PropagationResult propagate(const ControlSchedule& schedule, const SystemParams& params,
                            const StateVector& initial, double dt_max);

// Positivity violations beyond 1e-6 at a segment end throw NumericalError.
LindbladResult lindblad_evolve(const PiecewiseHamiltonian& h, std::span<const Matrix> collapse,
                               const Matrix& rho0, const EvolveOptions& opts = {},
                               const Observables* obs = nullptr);

// Waiting-time unraveling: no-jump evolution under H - (i/2) sum L^dag L, jump
// when |psi|^2 drops below a uniform draw, channel picked by |L psi|^2. The
// generator of trajectory k is seeded from (seed, k) alone.
TrajectoryResult mcwf_sample(const PiecewiseHamiltonian& h, std::span<const Matrix> collapse,
                             const Vector& psi0, const Vector& target, std::size_t n_traj,
                             std::uint64_t seed, const EvolveOptions& opts = {});

// Boxcar average over `window` ns (centred, clipped at the ends) of the sampled
// moments, integrating the piecewise-linear interpolant. window = 0 returns the input.
std::vector<Sample> windowed_expectations(const std::vector<Sample>& samples, double window);

// ---- NOON helpers -------------------------------------------------------------------

// Phase-free fidelity against the dressed NOON state at the idle point:
// (|<D_a|psi>| + |<D_b|psi>|)^2 / 2.
double noon_fidelity_dressed(const StateVector& psi, int n, const SystemParams& params);
// Same for any target: (sum_k |c_k| |<D_k|psi>|)^2 / sum_k |c_k|^2 over the target's
// Fock pairs, relative phases ignored.
double dressed_fidelity(const StateVector& psi, const AmplitudeTable& target, const SystemParams& params);

struct ScheduleRun {
    ControlSchedule schedule;
    PropagationResult run;
    double fidelity = 0.0;
};
// Calibrated full-Hamiltonian NOON preparation from |0,0,0>.
ScheduleRun noon_schedule_run(int n, const SystemParams& params, double dt_max, double ramp_ns = 0.0,
                              double sample_every = -1.0);

// Two qutrits (each coupled to its own resonator) in the order
// (q_a, q_b, n_a, n_b). Bell preparation, then R12 pairs and swaps in parallel.
struct TwoQutritModel {
    int n = 0;
    std::size_t dim = 0;
    PiecewiseHamiltonian h;
    std::vector<Matrix> collapse;
    Vector initial;  // |0,0,0,0>
    std::size_t index(int qa, int qb, int na, int nb) const;
};
TwoQutritModel method2_model(int n, const SystemParams& params, const DecoherenceParams& dec);

// Ideal-mode fidelities of the two NOON methods against their lossless outputs.
struct NoonDissipation {
    double lindblad = 0.0;
    double closed_reference_norm = 0.0;
    LindbladResult detail;
};
NoonDissipation method1_lindblad(int n, const SystemParams& params, const DecoherenceParams& dec,
                                 const EvolveOptions& opts = {});
NoonDissipation method2_lindblad(int n, const SystemParams& params, const DecoherenceParams& dec,
                                 const EvolveOptions& opts = {});
TrajectoryResult method1_trajectories(int n, const SystemParams& params, const DecoherenceParams& dec,
                                      std::size_t n_traj, std::uint64_t seed,
                                      const EvolveOptions& opts = {});
TrajectoryResult method2_trajectories(int n, const SystemParams& params, const DecoherenceParams& dec,
                                      std::size_t n_traj, std::uint64_t seed,
                                      const EvolveOptions& opts = {});

}  // namespace fockprog

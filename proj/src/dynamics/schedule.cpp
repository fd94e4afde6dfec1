// Programs -> control schedules, with optional calibration against the dressed spectrum.

#include "fockprog/dynamics.hpp"
#include "fockprog/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fockprog {

namespace {

constexpr double kPi = std::numbers::pi;

double formula_frequency(const SystemParams& p, int levels, int na, int nb) {
    return levels == 2 ? transition_frequency(p, na, nb) : qutrit_drive_frequency(p, na, nb);
}

double raised_cosine(double x) { return 0.5 * (1.0 - std::cos(kPi * x)); }

// Golden-section minimum of f on [a, b].
template <class F>
double golden_min(F&& f, double a, double b, double tol, int max_it = 200) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_it && b - a > tol; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

struct SwapPair {
    BasisLabel lo, hi;  // |1, n-1> and |0, n> on the swapped mode
    double omega_r = 0.0;
    double g = 0.0;
};

SwapPair swap_pair(const PulseStep& step, const SystemParams& p) {
    const int n = step.n_class;
    if (n < 1) throw ValidationError("swap step needs ladder index >= 1");
    if (step.kind == StepKind::swap_a) return {{1, n - 1, 0}, {0, n, 0}, p.omega_a, p.g_a};
    return {{1, 0, n - 1}, {0, 0, n}, p.omega_b, p.g_b};
}

// Splitting of the two dressed levels carrying the pair when the qubit sits at w.
double pair_gap(const HilbertSpace& space, const SystemParams& p, const SwapPair& sp, double w) {
    const Matrix h = static_hamiltonian(space, p, w).m;
    const int exc = sp.hi.q + sp.hi.na + sp.hi.nb;
    std::vector<Eigen::Index> block;
    Eigen::Index lo = -1, hi = -1;
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const auto l = space.label(i);
        if (l.q + l.na + l.nb != exc) continue;
        if (l == sp.lo) lo = Eigen::Index(block.size());
        if (l == sp.hi) hi = Eigen::Index(block.size());
        block.push_back(Eigen::Index(i));
    }
    const auto m = Eigen::Index(block.size());
    Matrix sub(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < m; ++c) sub(r, c) = h(block[r], block[c]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
    Eigen::Index best = 0, second = 0;
    double wb = -1, ws = -1;
    for (Eigen::Index k = 0; k < m; ++k) {
        const double wt = std::norm(es.eigenvectors()(lo, k)) + std::norm(es.eigenvectors()(hi, k));
        if (wt > wb) {
            second = best;
            ws = wb;
            best = k;
            wb = wt;
        } else if (wt > ws) {
            second = k;
            ws = wt;
        }
    }
    return std::abs(es.eigenvalues()(best) - es.eigenvalues()(second));
}

// Population moved from dressed |lo> to dressed |hi> by one ramped swap segment.
double ramped_transfer(const HilbertSpace& space, const SystemParams& p, const DressedSpectrum& idle,
                       const SwapPair& sp, double omega_park, double ramp, double plateau) {
    ControlSchedule sch;
    sch.omega_q_idle = p.omega_q;
    ScheduleSegment seg;
    seg.t_end = plateau + 2.0 * ramp;
    seg.omega_q = omega_park;
    seg.ramp = ramp;
    seg.kind = StepKind::swap_a;
    sch.segments.push_back(seg);
    const auto h = schedule_hamiltonian(sch, p, space);
    const StateVector start = idle.state(sp.lo.q, sp.lo.na, sp.lo.nb);
    EvolveOptions o;  // calibration trials need far less than the production run
    o.rtol = 1e-9;
    o.atol = 1e-12;
    const auto run = propagate(h, start.amps, o);
    const StateVector end = idle.state(sp.hi.q, sp.hi.na, sp.hi.nb);
    return std::norm(end.amps.dot(run.final));
}

}  // namespace

BasisLabel primary_pair(AddressingRule rule, int n_class) {
    if (rule == AddressingRule::difference) return {0, std::max(n_class, 0), std::max(-n_class, 0)};
    if (n_class < 0) throw ValidationError("sum-rule class must be >= 0");
    return {0, n_class, 0};
}

double segment_omega_q(const ScheduleSegment& seg, double omega_q_idle, double t) {
    if (seg.ramp <= 0.0) return seg.omega_q;
    const double tau = t - seg.t_start, len = seg.t_end - seg.t_start;
    double env = 1.0;
    if (tau < seg.ramp)
        env = raised_cosine(std::max(tau, 0.0) / seg.ramp);
    else if (tau > len - seg.ramp)
        env = raised_cosine(std::max(len - tau, 0.0) / seg.ramp);
    return omega_q_idle + (seg.omega_q - omega_q_idle) * env;
}

void ControlSchedule::validate() const {
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        std::ostringstream os;
        if (!(s.t_end >= s.t_start)) {
            os << "schedule segment " << i << " has negative duration";
            throw ValidationError(os.str());
        }
        if (i > 0 && std::abs(s.t_start - segments[i - 1].t_end) > 1e-9) {
            os << "schedule segment " << i << (s.t_start < segments[i - 1].t_end ? " overlaps" : " leaves a gap after")
               << " segment " << i - 1;
            throw ValidationError(os.str());
        }
        if (s.ramp < 0.0 || 2.0 * s.ramp > s.t_end - s.t_start + 1e-12) {
            os << "schedule segment " << i << ": ramps longer than the segment";
            throw ValidationError(os.str());
        }
        if (s.drive && s.drive->amplitude < 0.0) {
            os << "schedule segment " << i << ": negative drive amplitude";
            throw ValidationError(os.str());
        }
    }
}

StepCalibration calibrate_step(const PulseStep& step, const SystemParams& p, const HilbertSpace& space,
                               AddressingRule rule, double ramp_ns, double rate) {
    StepCalibration cal;
    const int levels = space.qubit_levels();
    if (step.kind == StepKind::rabi) {
        const BasisLabel pr = primary_pair(rule, step.n_class);
        if (!space.contains(1, pr.na, pr.nb))
            throw ValidationError("calibration space too small for Rabi class " + std::to_string(step.n_class));
        const auto d = dressed_spectrum(space, p, p.omega_q);
        const double exact = d.energy(1, pr.na, pr.nb) - d.energy(0, pr.na, pr.nb);
        const double formula = formula_frequency(p, levels, pr.na, pr.nb);
        double dw = 0.0;
        try {
            dw = std::abs(make_dispersive_map(p, levels).delta_omega);
        } catch (const ValidationError&) {
            dw = std::abs(transition_frequency(p, 1, 0) - transition_frequency(p, 0, 0));
        }
        const double window = std::max(5.0 * dw, 1e-9 * p.omega_q);
        if (std::abs(exact - formula) > window) {
            std::ostringstream os;
            os << "dressed transition for class " << step.n_class << " at " << to_ghz(exact)
               << " GHz is outside the search window around " << to_ghz(formula) << " GHz";
            throw ValidationError(os.str());
        }
        const StateVector d0 = d.state(0, pr.na, pr.nb), d1 = d.state(1, pr.na, pr.nb);
        const cplx elem = d1.amps.dot(sigma_plus_01(space).m * d0.amps);
        if (std::abs(elem) < 1e-6) throw ValidationError("dressed Rabi matrix element vanishes");
        cal.frequency = exact;
        cal.frequency_shift = exact - formula;
        cal.amplitude_factor = 1.0 / std::abs(elem);
        cal.rate = rate > 0.0 ? rate : p.rabi_omega;
        cal.amplitude = cal.rate * cal.amplitude_factor;
        cal.phase_offset = std::arg(elem);
        cal.omega_q = p.omega_q;
        cal.duration = rate > 0.0 ? std::abs(step.theta) / rate : step.duration;
        return cal;
    }
    if (step.kind == StepKind::phase_shift) {
        cal.omega_q = p.omega_q;
        cal.duration = std::abs(step.theta) / p.shift_omega;
        return cal;
    }

    const SwapPair sp = swap_pair(step, p);
    if (!space.contains(sp.hi.q, sp.hi.na, sp.hi.nb))
        throw ValidationError("calibration space too small for swap ladder " + std::to_string(step.n_class));
    const double gn = sp.g * std::sqrt(double(step.n_class));
    const auto gap = [&](double w) { return pair_gap(space, p, sp, w); };
    const double park = golden_min(gap, sp.omega_r - 4.0 * gn, sp.omega_r + 4.0 * gn, 1e-11 * sp.omega_r);
    const double g_min = gap(park);
    if (!(g_min > 0.0)) throw ValidationError("swap avoided crossing not found");
    // Refine park and plateau on the simulated dressed transfer: the sudden (or
    // ramped) switch between idle and resonant dressed bases shifts both.
    const auto idle = dressed_spectrum(space, p, p.omega_q);
    const auto transfer = [&](double w, double plateau) {
        return ramped_transfer(space, p, idle, sp, w, ramp_ns, plateau);
    };
    const double full = kPi / g_min;  // plateau of a complete transfer at the gap minimum
    double w = park, plateau = std::max(0.0, full - ramp_ns);
    for (int round = 0; round < 4; ++round) {
        const double pw = plateau;
        plateau = golden_min([&](double x) { return -transfer(w, x); }, std::max(0.0, pw - 0.3 * full),
                             pw + 0.3 * full, 1e-7);
        const double ww = w;
        w = golden_min([&](double x) { return -transfer(x, plateau); }, ww - 0.3 * gn, ww + 0.3 * gn,
                       1e-10 * sp.omega_r);
    }
    cal.omega_q = w;
    cal.frequency_shift = w - sp.omega_r;
    const double want = std::pow(std::sin(step.theta), 2);
    if (step.theta < kPi / 2 - 1e-9) {
        double a = 0.0, b = plateau;
        if (transfer(w, 0.0) >= want) {
            b = 0.0;
        } else {
            for (int it = 0; it < 60 && b - a > 1e-7; ++it) {
                const double m = 0.5 * (a + b);
                (transfer(w, m) < want ? a : b) = m;
            }
        }
        plateau = 0.5 * (a + b);
    }
    cal.duration = ramp_ns > 0.0 ? plateau + 2.0 * ramp_ns : plateau;
    cal.duration_factor = step.duration > 0.0 ? cal.duration / step.duration : 1.0;
    return cal;
}

std::pair<double, double> selective_rate(const PulseStep& step, const StateVector& before,
                                         const SystemParams& p, AddressingRule rule, double max_rate) {
    if (step.kind != StepKind::rabi) throw ValidationError("selective_rate needs a Rabi step");
    if (!(max_rate > 0.0)) throw ValidationError("max_rate must be > 0");
    const HilbertSpace& space = before.space;
    const BasisLabel pr = primary_pair(rule, step.n_class);
    if (!space.contains(1, pr.na, pr.nb)) throw ValidationError("space too small for Rabi class");
    const auto d = dressed_spectrum(space, p, p.omega_q);
    const Matrix sp = sigma_plus_01(space).m;
    const auto element = [&](int na, int nb) {
        return std::abs(d.state(1, na, nb).amps.dot(sp * d.state(0, na, nb).amps));
    };
    const double f = d.energy(1, pr.na, pr.nb) - d.energy(0, pr.na, pr.nb);
    const double m0 = element(pr.na, pr.nb);

    struct Spectator {
        double pop, detuning, rel;
    };
    std::vector<Spectator> spec;
    for (int na = 0; na <= space.na_max(); ++na)
        for (int nb = 0; nb <= space.nb_max(); ++nb) {
            if (stark_class(rule, na, nb) == step.n_class || !space.contains(1, na, nb)) continue;
            const double pop = std::norm(before.amp(0, na, nb)) + std::norm(before.amp(1, na, nb));
            if (pop < 1e-12) continue;
            spec.push_back({pop, d.energy(1, na, nb) - d.energy(0, na, nb) - f, element(na, nb) / m0});
        }
    const double theta = std::abs(step.theta);
    const auto leak = [&](double rate) {
        const double t = theta / rate;
        double sum = 0.0;
        for (const auto& s : spec) {
            const double om = rate * s.rel, w = std::hypot(om, s.detuning);
            sum += s.pop * (om * om) / (w * w) * std::pow(std::sin(0.5 * w * t), 2);
        }
        return sum;
    };
    if (spec.empty() || theta == 0.0) return {max_rate, 0.0};
    constexpr int kGrid = 4000;
    const double lo = 0.1 * max_rate, hstep = (max_rate - lo) / kGrid;
    double best = max_rate, best_leak = leak(max_rate);
    for (int k = 1; k <= kGrid; ++k) {
        const double r = max_rate - k * hstep, l = leak(r);
        if (l < best_leak - 1e-12) {
            best = r;
            best_leak = l;
        }
    }
    const double r = golden_min(leak, std::max(lo, best - hstep), std::min(max_rate, best + hstep), 1e-12 * max_rate);
    if (leak(r) < best_leak) {
        best = r;
        best_leak = leak(r);
    }
    return {best, best_leak};
}

ControlSchedule schedule_from_program(const PulseProgram& program, const SystemParams& params,
                                      const ScheduleOptions& opts) {
    if (opts.ramp_ns < 0.0) throw ValidationError("ramp must be >= 0");
    ControlSchedule sch;
    sch.omega_q_idle = params.omega_q;
    std::optional<HilbertSpace> cal_space;
    std::optional<StateVector> ideal;  // ideal state before the current step
    if (opts.calibrate) {
        cal_space = ideal_space(program, opts.guard);
        if (opts.selective_rates) ideal = basis_state(*cal_space, 0, 0, 0);
    }

    double t = 0.0;
    auto push = [&](ScheduleSegment seg, double len) {
        if (len < 0.0) throw ValidationError("negative segment duration");
        if (len == 0.0) return;
        seg.t_start = t;
        seg.t_end = t + len;
        t = seg.t_end;
        sch.segments.push_back(seg);
    };
    auto phase_segment = [&](double phi, StepKind kind, std::size_t i) {
        if (phi == 0.0) return;
        const double tau = std::abs(phi) / params.shift_omega;
        ScheduleSegment seg;
        seg.kind = kind;
        seg.step = i;
        seg.omega_q = params.omega_q + (phi > 0 ? params.shift_omega : -params.shift_omega);
        seg.ramp = std::min(opts.ramp_ns, tau);
        push(seg, tau + seg.ramp);
    };

    for (std::size_t i = 0; i < program.steps.size(); ++i) {
        const PulseStep& st = program.steps[i];
        if (st.duration < 0.0) throw ValidationError("step " + std::to_string(i) + " has negative duration");
        switch (st.kind) {
            case StepKind::rabi: {
                ScheduleSegment seg;
                seg.kind = st.kind;
                seg.step = i;
                seg.omega_q = params.omega_q;
                DriveSpec dr;
                double len = st.duration;
                if (cal_space) {
                    const double rate = ideal ? selective_rate(st, *ideal, params, program.rule, program.rates.rabi).first
                                              : 0.0;
                    const auto cal = calibrate_step(st, params, *cal_space, program.rule, opts.ramp_ns, rate);
                    dr = {cal.amplitude, cal.frequency, st.drive_phase + cal.phase_offset};
                    len = cal.duration;
                } else {
                    const BasisLabel pr = primary_pair(program.rule, st.n_class);
                    dr = {program.rates.rabi, formula_frequency(params, program.atom_levels, pr.na, pr.nb),
                          st.drive_phase};
                }
                seg.drive = dr;
                push(seg, len);
                // Z(alpha) after the rotation: relative phase 2 alpha on |1>
                phase_segment(2.0 * st.phase_alpha, StepKind::phase_shift, i);
                break;
            }
            case StepKind::swap_a:
            case StepKind::swap_b: {
                ScheduleSegment seg;
                seg.kind = st.kind;
                seg.step = i;
                if (cal_space) {
                    const auto cal = calibrate_step(st, params, *cal_space, program.rule, opts.ramp_ns);
                    seg.omega_q = cal.omega_q;
                    seg.ramp = opts.ramp_ns;
                    push(seg, cal.duration);
                } else {
                    seg.omega_q = st.kind == StepKind::swap_a ? params.omega_a : params.omega_b;
                    seg.ramp = std::min(opts.ramp_ns, st.duration);
                    push(seg, st.duration + seg.ramp);
                }
                break;
            }
            case StepKind::phase_shift: phase_segment(st.theta, st.kind, i); break;
        }
        if (ideal) apply_step_ideal(*ideal, st, program.rule, program.rates);
    }
    sch.validate();
    return sch;
}

PiecewiseHamiltonian schedule_hamiltonian(const ControlSchedule& schedule, const SystemParams& params,
                                          const HilbertSpace& space) {
    schedule.validate();
    const double ref = schedule.omega_q_idle;
    PiecewiseHamiltonian h;
    h.dim = space.dim();
    const Matrix sp = sigma_plus_01(space).m;
    const Matrix excited = identity(space).m - atom_projector(space, 0).m;
    h.term_sets.push_back({static_hamiltonian(space, params, ref, ref).m, excited, sp, sp.adjoint()});
    for (const ScheduleSegment& seg : schedule.segments) {
        PiecewiseHamiltonian::Segment s;
        s.t0 = seg.t_start;
        s.t1 = seg.t_end;
        s.set = 0;
        s.step = seg.step;
        s.coeffs = [seg, ref](double t, cplx* out) {
            out[0] = 1.0;
            out[1] = segment_omega_q(seg, ref, t) - ref;
            if (seg.drive) {
                const auto& d = *seg.drive;
                const cplx c = 0.5 * d.amplitude * std::exp(cplx(0.0, -((d.frequency - ref) * t + d.phase)));
                out[2] = c;
                out[3] = std::conj(c);
            } else {
                out[2] = out[3] = 0.0;
            }
        };
        h.segments.push_back(std::move(s));
    }
    return h;
}

PropagationResult propagate(const ControlSchedule& schedule, const SystemParams& params,
                            const StateVector& initial, double dt_max) {
    if (!(dt_max > 0.0)) throw ValidationError("dt_max must be > 0");
    check_normalized(initial);
    const auto h = schedule_hamiltonian(schedule, params, initial.space);
    const auto obs = observables(initial.space);
    EvolveOptions o;
    o.dt_max = dt_max;
    o.sample_every = 0.0;
    return propagate(h, initial.amps, o, &obs);
}

}  // namespace fockprog

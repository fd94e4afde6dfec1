// Ideal-mode generators, the two-qutrit NOON model and NOON drivers.

#include "fockprog/dynamics.hpp"
#include "fockprog/errors.hpp"

#include <cmath>
#include <numbers>

namespace fockprog {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

PiecewiseHamiltonian ideal_hamiltonian(const PulseProgram& program, const HilbertSpace& space) {
    if (space.qubit_levels() < program.atom_levels)
        throw ValidationError("space has fewer atom levels than the program");
    if (space.na_max() < program.max_na() || space.nb_max() < program.max_nb())
        throw ValidationError("space truncation too small for the program");
    const auto d = static_cast<Eigen::Index>(space.dim());
    const auto& r = program.rates;
    PiecewiseHamiltonian h;
    h.dim = space.dim();

    const Matrix sp = sigma_plus_01(space).m;
    const Matrix p1 = atom_projector(space, 1).m;
    const Matrix nq = atom_number(space).m;
    const Matrix swap_a = sp * mode_lowering(space, Mode::a).m;
    const Matrix swap_b = sp * mode_lowering(space, Mode::b).m;

    for (std::size_t i = 0; i < program.steps.size(); ++i) {
        const PulseStep& st = program.steps[i];
        switch (st.kind) {
            case StepKind::rabi: {
                Matrix gen = Matrix::Zero(d, d);
                const cplx e = 0.5 * r.rabi * std::exp(cplx(0.0, st.drive_phase));
                for (int na = 0; na <= space.na_max(); ++na)
                    for (int nb = 0; nb <= space.nb_max(); ++nb) {
                        if (stark_class(program.rule, na, nb) != st.n_class) continue;
                        const auto i0 = Eigen::Index(space.index(0, na, nb));
                        const auto i1 = Eigen::Index(space.index(1, na, nb));
                        gen(i0, i1) = e;
                        gen(i1, i0) = std::conj(e);
                    }
                if (st.duration > 0.0) h.push_constant(gen, st.duration, i);
                if (st.phase_alpha != 0.0) {
                    const double sgn = st.phase_alpha > 0 ? 1.0 : -1.0;
                    h.push_constant(sgn * r.shift * p1, 2.0 * std::abs(st.phase_alpha) / r.shift, i);
                }
                break;
            }
            case StepKind::swap_a:
            case StepKind::swap_b: {
                const Matrix& c = st.kind == StepKind::swap_a ? swap_a : swap_b;
                const double g = st.kind == StepKind::swap_a ? r.g_a : r.g_b;
                if (st.duration > 0.0) h.push_constant(g * (c + c.adjoint()), st.duration, i);
                break;
            }
            case StepKind::phase_shift:
                if (st.theta != 0.0)
                    h.push_constant((st.theta > 0 ? r.shift : -r.shift) * nq, std::abs(st.theta) / r.shift, i);
                break;
        }
    }
    if (h.segments.empty()) h.dim = space.dim();
    return h;
}

double noon_fidelity_dressed(const StateVector& psi, int n, const SystemParams& params) {
    const auto d = dressed_spectrum(psi.space, params, params.omega_q);
    const double ca = std::abs(d.state(0, n, 0).amps.dot(psi.amps));
    const double cb = std::abs(d.state(0, 0, n).amps.dot(psi.amps));
    return 0.5 * (ca + cb) * (ca + cb);
}

double dressed_fidelity(const StateVector& psi, const AmplitudeTable& target, const SystemParams& params) {
    const auto d = dressed_spectrum(psi.space, params, params.omega_q);
    const Matrix& c = target.matrix();
    double sum = 0.0, norm = 0.0;
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        for (Eigen::Index j = 0; j < c.cols(); ++j) {
            const double w = std::abs(c(i, j));
            if (w == 0.0) continue;
            if (!psi.space.contains(0, int(i), int(j))) throw ValidationError("target does not fit the state's space");
            sum += w * std::abs(d.state(0, int(i), int(j)).amps.dot(psi.amps));
            norm += w * w;
        }
    if (!(norm > 0.0)) throw ValidationError("target is zero");
    return sum * sum / norm;
}

ScheduleRun noon_schedule_run(int n, const SystemParams& params, double dt_max, double ramp_ns,
                              double sample_every) {
    const PulseProgram prog = noon_program(n, params);
    ScheduleOptions so;
    so.ramp_ns = ramp_ns;
    so.calibrate = true;
    so.guard = 1;
    ScheduleRun out;
    out.schedule = schedule_from_program(prog, params, so);
    const HilbertSpace space = ideal_space(prog, 1);
    const auto h = schedule_hamiltonian(out.schedule, params, space);
    const auto obs = observables(space);
    EvolveOptions o;
    o.dt_max = dt_max;
    o.sample_every = sample_every;
    out.run = propagate(h, basis_state(space, 0, 0, 0).amps, o, &obs);
    out.fidelity = noon_fidelity_dressed({space, out.run.final}, n, params);
    return out;
}

// ---- two qutrits --------------------------------------------------------------------

std::size_t TwoQutritModel::index(int qa, int qb, int na, int nb) const {
    const auto m = static_cast<std::size_t>(n + 1);
    return ((static_cast<std::size_t>(qa) * 3 + qb) * m + na) * m + nb;
}

TwoQutritModel method2_model(int n, const SystemParams& p, const DecoherenceParams& dec) {
    if (n < 1) throw ValidationError("NOON order must be >= 1");
    if (p.g_a != p.g_b) throw ValidationError("two-qutrit model assumes equal couplings g_a = g_b");
    dec.validate();
    TwoQutritModel m;
    m.n = n;
    m.dim = 9 * static_cast<std::size_t>(n + 1) * (n + 1);
    const auto d = static_cast<Eigen::Index>(m.dim);

    // |to><from| on one qutrit, optionally times a mode operator (-1 lower, 0 none)
    auto op = [&](bool on_a, int to, int from, int mode_lower_a, int mode_lower_b) {
        Matrix out = Matrix::Zero(d, d);
        for (int qa = 0; qa < 3; ++qa)
            for (int qb = 0; qb < 3; ++qb)
                for (int na = 0; na <= n; ++na)
                    for (int nb = 0; nb <= n; ++nb) {
                        int qa2 = qa, qb2 = qb, na2 = na, nb2 = nb;
                        double v = 1.0;
                        if (to >= 0) {
                            int& q = on_a ? qa2 : qb2;
                            if (q != from) continue;
                            q = to;
                        }
                        if (mode_lower_a) {
                            if (na2 == 0) continue;
                            v *= std::sqrt(double(na2));
                            --na2;
                        }
                        if (mode_lower_b) {
                            if (nb2 == 0) continue;
                            v *= std::sqrt(double(nb2));
                            --nb2;
                        }
                        out(Eigen::Index(m.index(qa2, qb2, na2, nb2)), Eigen::Index(m.index(qa, qb, na, nb))) = v;
                    }
        return out;
    };
    auto herm = [](const Matrix& x) { return Matrix(x + x.adjoint()); };

    const double om = p.rabi_omega, g = p.g_a;
    // Bell pair: pi pulse on qutrit a, then a half swap between the qutrits
    m.h.push_constant(0.5 * om * herm(op(true, 1, 0, 0, 0)), kPi / om, 0);
    m.h.push_constant(g * herm(op(true, 0, 1, 0, 0) * op(false, 1, 0, 0, 0)), kPi / (4.0 * g), 1);
    std::size_t step = 2;
    for (int k = 1; k <= n - 1; ++k) {
        m.h.push_constant(0.5 * om * (herm(op(true, 2, 1, 0, 0)) + herm(op(false, 2, 1, 0, 0))), kPi / om, step++);
        const Matrix sw = std::sqrt(2.0) * g * (herm(op(true, 2, 1, 1, 0)) + herm(op(false, 2, 1, 0, 1)));
        m.h.push_constant(sw, kPi / (2.0 * std::sqrt(2.0 * k) * g), step++);
    }
    const Matrix last = g * (herm(op(true, 1, 0, 1, 0)) + herm(op(false, 1, 0, 0, 1)));
    m.h.push_constant(last, kPi / (2.0 * std::sqrt(double(n)) * g), step);

    // sqrt(q) lowering on each qutrit and the two resonators
    auto qutrit_lower = [&](bool on_a) { return Matrix(op(on_a, 0, 1, 0, 0) + std::sqrt(2.0) * op(on_a, 1, 2, 0, 0)); };
    if (dec.gamma_q() > 0.0) {
        m.collapse.push_back(std::sqrt(dec.gamma_q()) * qutrit_lower(true));
        m.collapse.push_back(std::sqrt(dec.gamma_q()) * qutrit_lower(false));
    }
    if (dec.gamma_r() > 0.0) {
        m.collapse.push_back(std::sqrt(dec.gamma_r()) * op(true, -1, -1, 1, 0));
        m.collapse.push_back(std::sqrt(dec.gamma_r()) * op(true, -1, -1, 0, 1));
    }
    m.initial = Vector::Zero(d);
    m.initial(Eigen::Index(m.index(0, 0, 0, 0))) = 1.0;
    return m;
}

// ---- NOON dissipation drivers -------------------------------------------------------

namespace {

struct IdealNoon {
    PiecewiseHamiltonian h;
    std::vector<Matrix> collapse;
    Vector initial;
    Vector reference;
    double reference_norm = 0.0;
};

EvolveOptions closed_options(const EvolveOptions& o) {
    EvolveOptions c = o;
    c.rtol = 0.0;
    c.sample_every = -1.0;
    return c;
}

IdealNoon method1_setup(int n, const SystemParams& p, const DecoherenceParams& dec, const EvolveOptions& o) {
    IdealNoon s;
    const PulseProgram prog = noon_program(n, p);
    const HilbertSpace space = ideal_space(prog, 1);
    s.h = ideal_hamiltonian(prog, space);
    s.collapse = collapse_operators(space, dec);
    s.initial = basis_state(space, 0, 0, 0).amps;
    s.reference = propagate(s.h, s.initial, closed_options(o)).final;
    s.reference_norm = s.reference.norm();
    s.reference /= s.reference_norm;
    return s;
}

IdealNoon method2_setup(int n, const SystemParams& p, const DecoherenceParams& dec, const EvolveOptions& o) {
    auto m = method2_model(n, p, dec);
    IdealNoon s;
    s.h = std::move(m.h);
    s.collapse = std::move(m.collapse);
    s.initial = m.initial;
    s.reference = propagate(s.h, s.initial, closed_options(o)).final;
    s.reference_norm = s.reference.norm();
    s.reference /= s.reference_norm;
    return s;
}

NoonDissipation lindblad_on(const IdealNoon& s, const EvolveOptions& o) {
    NoonDissipation out;
    const Matrix rho0 = s.initial * s.initial.adjoint();
    out.detail = lindblad_evolve(s.h, s.collapse, rho0, o);
    out.lindblad = s.reference.dot(out.detail.final * s.reference).real();
    out.closed_reference_norm = s.reference_norm;
    return out;
}

}  // namespace

NoonDissipation method1_lindblad(int n, const SystemParams& p, const DecoherenceParams& dec,
                                 const EvolveOptions& o) {
    return lindblad_on(method1_setup(n, p, dec, o), o);
}

NoonDissipation method2_lindblad(int n, const SystemParams& p, const DecoherenceParams& dec,
                                 const EvolveOptions& o) {
    return lindblad_on(method2_setup(n, p, dec, o), o);
}

TrajectoryResult method1_trajectories(int n, const SystemParams& p, const DecoherenceParams& dec,
                                      std::size_t n_traj, std::uint64_t seed, const EvolveOptions& o) {
    const auto s = method1_setup(n, p, dec, o);
    return mcwf_sample(s.h, s.collapse, s.initial, s.reference, n_traj, seed, o);
}

TrajectoryResult method2_trajectories(int n, const SystemParams& p, const DecoherenceParams& dec,
                                      std::size_t n_traj, std::uint64_t seed, const EvolveOptions& o) {
    const auto s = method2_setup(n, p, dec, o);
    return mcwf_sample(s.h, s.collapse, s.initial, s.reference, n_traj, seed, o);
}

}  // namespace fockprog

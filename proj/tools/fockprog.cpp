#include "fockprog/compiler.hpp"
#include "fockprog/dynamics.hpp"
#include "fockprog/errors.hpp"
#include "fockprog/io.hpp"
#include "fockprog/perturbative.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

using namespace fockprog;

namespace {

constexpr double kPi = std::numbers::pi;

struct Config {
    std::string params_file;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    std::size_t n_traj = 1024;
    double dt_max_ns = 0.0;
    double ramp_ns = 1.0;
    std::string mode = "ideal";
    std::string target;
    std::string program_file;
    std::string rule = "difference";
    int levels = 2;
    int guard = 1;
    double window_ns = 0.0;
    double sample_every_ns = 0.1;
    unsigned threads = 0;
    // sweeps
    int n_max = 6;
    int n = 4;
    std::vector<double> tq_ns;
    std::string figure;
};

// dissipation study defaults: g/2pi = 100 MHz, T_r = 10 us
SystemParams dissipation_defaults() {
    SystemParams p;
    p.g_a = p.g_b = mhz(100.0);
    p.t_r = 1e4;
    return p;
}

SystemParams load(const Config& c, const SystemParams& fallback) {
    SystemParams p = c.params_file.empty() ? fallback : load_params(c.params_file);
    for (const auto& w : p.validate()) std::cerr << "warning: " << w << "\n";
    return p;
}

EvolveOptions evolve_options(const Config& c) {
    EvolveOptions o;
    o.dt_max = c.dt_max_ns;
    o.sample_every = c.sample_every_ns;
    o.threads = c.threads;
    return o;
}

std::string label(const PulseStep& s) {
    switch (s.kind) {
        case StepKind::rabi: return "R" + std::to_string(s.n_class);
        case StepKind::swap_a: return "A" + std::to_string(s.n_class);
        case StepKind::swap_b: return "B" + std::to_string(s.n_class);
        case StepKind::phase_shift: return "Z";
    }
    return "?";
}

std::string populations(const StateVector& s, double tol = 1e-12) {
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < s.space.dim(); ++i) {
        const double p = std::norm(s.amps(Eigen::Index(i)));
        if (p <= tol) continue;
        const auto l = s.space.label(i);
        os << (first ? "" : " ") << "|" << l.q << "," << l.na << "," << l.nb << ">:" << format_number(p);
        first = false;
    }
    return os.str();
}

// A program from --program, or synthesized from --target.
struct Job {
    PulseProgram program;
    AmplitudeTable target;
    std::string source;
};

Job make_job(const Config& c, const SystemParams& p) {
    if (!c.program_file.empty() && !c.target.empty())
        throw ValidationError("give either --program or --target, not both");
    Job j;
    if (!c.program_file.empty()) {
        j.program = load_program(c.program_file);
        j.target = j.program.target;
        j.source = c.program_file;
        if (j.program.params_hash != 0 && j.program.params_hash != p.hash())
            std::cerr << "warning: program was compiled for different parameters\n";
        return j;
    }
    if (c.target.empty()) throw ValidationError("a --target or --program is required");
    j.target = parse_target(c.target);
    SynthesisOptions so;
    so.rule = parse_rule(c.rule);
    so.atom_levels = c.levels;
    j.program = synthesize(j.target, p, so);
    j.source = "target:" + c.target;
    return j;
}

double forward_fidelity(const PulseProgram& prog, const AmplitudeTable& target) {
    const auto space = ideal_space(prog);
    const auto out = run_ideal(prog, basis_state(space, 0, 0, 0));
    return fidelity(out, target.to_state(space));
}

void write_run_files(const Config& c, const std::string& command, const Job& job, const SystemParams& p,
                     const DecoherenceParams& dec, double rtol, const ResultRecord& r) {
    RunManifest m;
    m.command = command;
    m.program_file = job.source;
    m.mode = c.mode;
    m.ramp_ns = c.ramp_ns;
    m.decoherence = dec;
    m.rtol = rtol;
    m.atol = 1e-12;
    m.dt_max_ns = c.dt_max_ns;
    m.n_traj = command == "trajectories" ? c.n_traj : 0;
    m.seed = c.seed;
    m.params_hash = p.hash();
    std::ostringstream ms, rs;
    write_manifest(ms, m);
    write_result(rs, r);
    write_text_file(c.out_dir, "manifest.txt", ms.str());
    write_text_file(c.out_dir, "result.txt", rs.str());
    std::ostringstream prog;
    write_program(prog, job.program);
    write_text_file(c.out_dir, "program.txt", prog.str());
}

void write_series(const Config& c, const std::vector<Sample>& samples, const SystemParams& p) {
    if (samples.empty()) return;
    std::ostringstream os;
    write_csv(os, series_table(samples), &p);
    write_text_file(c.out_dir, "series.csv", os.str());
    if (c.window_ns > 0.0) {
        CsvTable w = series_table(windowed_expectations(samples, c.window_ns));
        w.kind = "series-windowed";
        w.meta.emplace_back("window_ns", format_number(c.window_ns));
        std::ostringstream ws;
        write_csv(ws, w, &p);
        write_text_file(c.out_dir, "series_windowed.csv", ws.str());
    }
}

// Generator, collapse set and start state for either execution mode.
struct Setup {
    HilbertSpace space;
    PiecewiseHamiltonian h;
    Vector psi0;
};

Setup make_setup(const Config& c, const Job& job, const SystemParams& p) {
    Setup s;
    if (c.mode == "ideal") {
        s.space = ideal_space(job.program, c.guard);
        s.h = ideal_hamiltonian(job.program, s.space);
    } else if (c.mode == "schedule") {
        ScheduleOptions so;
        so.ramp_ns = c.ramp_ns;
        so.calibrate = true;
        so.guard = c.guard;
        const auto sch = schedule_from_program(job.program, p, so);
        s.space = ideal_space(job.program, c.guard);
        s.h = schedule_hamiltonian(sch, p, s.space);
    } else {
        throw ValidationError("--mode must be ideal or schedule");
    }
    s.psi0 = basis_state(s.space, 0, 0, 0).amps;
    return s;
}

double target_fidelity(const Config& c, const Setup& s, const Vector& psi, const AmplitudeTable& t,
                       const SystemParams& p) {
    if (c.mode == "schedule") return dressed_fidelity({s.space, psi}, t, p);
    return fidelity(StateVector{s.space, psi}, t.to_state(s.space));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- commands -----------------------------------------------------------------------

int cmd_synthesize(const Config& c) {
    const SystemParams p = load(c, SystemParams{});
    if (!c.program_file.empty()) throw ValidationError("synthesize takes --target, not --program");
    const Job job = make_job(c, p);
    const PulseProgram& prog = job.program;
    const double f = forward_fidelity(prog, job.target);
    const auto b = program_bounds(prog);
    std::ostringstream os;
    write_program(os, prog);
    const auto path = write_text_file(c.out_dir, "program.txt", os.str());

    std::printf("target           %s\n", c.target.c_str());
    std::printf("steps            %zu (rabi %zu, swap %zu, phase %zu)\n", prog.steps.size(),
                prog.count(StepKind::rabi), prog.count(StepKind::swap_a) + prog.count(StepKind::swap_b),
                prog.count(StepKind::phase_shift));
    std::printf("duration_ns      %.6f (rotations %.6f)\n", prog.duration(), prog.rotation_duration());
    std::printf("t_max_bound_ns   %.6f\n", b.t_max);
    std::printf("t_noon_bound_ns  %.6f\n", b.t_noon);
    std::printf("forward_fidelity %.15f\n", f);
    std::printf("program          %s\n", path.c_str());
    if (f < 1.0 - 1e-8) throw NumericalError("forward check failed: fidelity " + format_number(f));
    return 0;
}

CsvTable trace_table(const PulseProgram& prog) {
    CsvTable t;
    t.kind = "trace";
    t.columns = {"step", "label", "kind", "theta_rad", "n_class", "duration_ns", "populations"};
    const auto space = ideal_space(prog);
    t.add_row(std::vector<std::string>{"0", "start", "-", "0", "0", "0", populations(basis_state(space, 0, 0, 0))});
    run_ideal(prog, basis_state(space, 0, 0, 0), [&](std::size_t i, const StateVector& s) {
        const auto& st = prog.steps[i];
        t.add_row(std::vector<std::string>{std::to_string(i + 1), label(st), std::string(kind_token(st.kind)),
                                           format_number(st.theta), std::to_string(st.n_class),
                                           format_number(step_time(st, prog.rates)), populations(s)});
    });
    return t;
}

int cmd_run_ideal(const Config& c) {
    const SystemParams p = load(c, SystemParams{});
    const Job job = make_job(c, p);
    const auto t = trace_table(job.program);
    std::ostringstream os;
    write_csv(os, t, &p);
    const auto path = write_text_file(c.out_dir, "trace.csv", os.str());
    std::printf("steps    %zu\nfidelity %.15f\ntrace    %s\n", job.program.steps.size(),
                forward_fidelity(job.program, job.target), path.c_str());
    return 0;
}

int cmd_simulate(const Config& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const SystemParams p = load(c, SystemParams{});
    const Job job = make_job(c, p);
    const Setup s = make_setup(c, job, p);
    const auto obs = observables(s.space);
    const auto run = propagate(s.h, s.psi0, evolve_options(c), &obs);
    ResultRecord r;
    r.fidelity = target_fidelity(c, s, run.final, job.target, p);
    r.wall_time_s = seconds_since(t0);
    r.extra["max_norm_drift"] = format_number(run.max_norm_drift);
    r.extra["duration_ns"] = format_number(s.h.t_end());
    r.extra["steps_accepted"] = std::to_string(run.stats.accepted);
    write_series(c, run.samples, p);
    write_run_files(c, "simulate", job, p, {}, kClosedRtol, r);
    std::printf("mode %s\nfidelity %.10f\nnorm_drift %.3e\nduration_ns %.4f\n", c.mode.c_str(), r.fidelity,
                run.max_norm_drift, s.h.t_end());
    return 0;
}

int cmd_lindblad(const Config& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const SystemParams p = load(c, dissipation_defaults());
    const DecoherenceParams dec = DecoherenceParams::from(p);
    dec.validate();
    const Job job = make_job(c, p);
    const Setup s = make_setup(c, job, p);
    EvolveOptions closed = evolve_options(c);
    closed.sample_every = -1.0;
    Vector ref = propagate(s.h, s.psi0, closed).final;
    const double lossless = target_fidelity(c, s, ref, job.target, p);
    ref.normalize();
    const auto obs = observables(s.space);
    const auto col = collapse_operators(s.space, dec);
    const auto run = lindblad_evolve(s.h, col, s.psi0 * s.psi0.adjoint(), evolve_options(c), &obs);
    ResultRecord r;
    r.fidelity = ref.dot(run.final * ref).real();
    r.wall_time_s = seconds_since(t0);
    r.extra["lossless_fidelity"] = format_number(lossless);
    r.extra["max_trace_drift"] = format_number(run.max_trace_drift);
    r.extra["max_hermiticity"] = format_number(run.max_hermiticity);
    r.extra["min_eigenvalue"] = format_number(run.min_eigenvalue);
    write_series(c, run.samples, p);
    write_run_files(c, "lindblad", job, p, dec, kLindbladRtol, r);
    std::printf("mode %s\nfidelity %.10f (vs lossless output; lossless fidelity %.10f)\ntrace_drift %.3e\n"
                "hermiticity %.3e\n",
                c.mode.c_str(), r.fidelity, lossless, run.max_trace_drift, run.max_hermiticity);
    return 0;
}

int cmd_trajectories(const Config& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const SystemParams p = load(c, dissipation_defaults());
    const DecoherenceParams dec = DecoherenceParams::from(p);
    dec.validate();
    const Job job = make_job(c, p);
    const Setup s = make_setup(c, job, p);
    EvolveOptions o = evolve_options(c);
    o.sample_every = -1.0;
    Vector ref = propagate(s.h, s.psi0, o).final;
    ref.normalize();
    const auto res = mcwf_sample(s.h, collapse_operators(s.space, dec), s.psi0, ref, c.n_traj, c.seed, o);
    ResultRecord r;
    r.fidelity = res.mean_fidelity;
    r.std_error = res.std_error;
    r.wall_time_s = seconds_since(t0);
    r.extra["n_traj"] = std::to_string(res.n_traj);
    r.extra["seed"] = std::to_string(res.seed);
    r.extra["jumps"] = std::to_string(res.jumps);
    CsvTable t;
    t.kind = "trajectories";
    t.columns = {"trajectory", "fidelity"};
    for (std::size_t k = 0; k < res.fidelities.size(); ++k) t.add_row({double(k), res.fidelities[k]});
    std::ostringstream os;
    write_csv(os, t, &p);
    write_text_file(c.out_dir, "trajectories.csv", os.str());
    write_run_files(c, "trajectories", job, p, dec, kTrajectoryRtol, r);
    std::printf("mode %s\nfidelity %.10f +- %.10f (%zu trajectories, seed %llu)\n", c.mode.c_str(), r.fidelity,
                r.std_error, res.n_traj, static_cast<unsigned long long>(c.seed));
    return 0;
}

void add_sweep_row(CsvTable& t, const SweepPoint& s, double omega, double g) {
    const DecoherenceParams dec{s.t_q, s.t_r};
    t.add_row({double(s.n), s.t_q, s.t_r, s.f_m1, s.f_m2, s.f_m1_rho, s.f_m2_rho,
               fidelity_rough(NoonMethod::m1, s.n, dec, omega, g), fidelity_rough(NoonMethod::m2, s.n, dec, omega, g)});
}

int cmd_fidelity_sweep(const Config& c) {
    const SystemParams p = load(c, dissipation_defaults());
    if (p.g_a != p.g_b) std::cerr << "warning: closed forms use g_a; g_b differs\n";
    CsvTable t;
    t.kind = "fidelity-sweep";
    t.columns = {"N", "t_q_ns", "t_r_ns", "F_M1_closed", "F_M2_closed", "F_M1_recursion", "F_M2_recursion",
                 "F_M1_rough", "F_M2_rough"};
    if (c.tq_ns.empty()) {
        for (const auto& s : sweep_n(c.n_max, DecoherenceParams::from(p), p.rabi_omega, p.g_a))
            add_sweep_row(t, s, p.rabi_omega, p.g_a);
    } else {
        for (const auto& s : sweep_tq(c.n, c.tq_ns, p.t_r, p.rabi_omega, p.g_a)) add_sweep_row(t, s, p.rabi_omega, p.g_a);
    }
    std::ostringstream os;
    write_csv(os, t, &p);
    std::cout << os.str();
    write_text_file(c.out_dir, "fidelity_sweep.csv", os.str());
    return 0;
}

// ---- reproduce ----------------------------------------------------------------------

int reproduce_table1(const Config& c) {
    const SystemParams p = load(c, SystemParams{});
    const auto prog = noon_program(3, p);
    const auto t = trace_table(prog);
    std::ostringstream os;
    write_csv(os, t, &p);
    std::cout << os.str();
    write_text_file(c.out_dir, "table1.csv", os.str());
    return 0;
}

int reproduce_fig6(const Config& c) {
    const SystemParams p = load(c, SystemParams{});
    const double window = c.window_ns > 0.0 ? c.window_ns : 5.0;
    const auto run = noon_schedule_run(3, p, c.dt_max_ns, c.ramp_ns, c.sample_every_ns);
    const auto w = windowed_expectations(run.run.samples, window);

    CsvTable seg;
    seg.kind = "fig5-schedule";
    seg.columns = {"t_start_ns", "t_end_ns", "label", "omega_q_ghz", "ramp_ns", "drive_amp_mhz", "drive_freq_ghz",
                   "drive_phase_rad"};
    const auto prog = noon_program(3, p);
    for (const auto& s : run.schedule.segments) {
        const std::string lab = s.kind == StepKind::phase_shift ? "Z" : label(prog.steps[s.step]);
        seg.add_row(std::vector<std::string>{
            format_number(s.t_start), format_number(s.t_end), lab, format_number(to_ghz(s.omega_q)),
            format_number(s.ramp), format_number(s.drive ? to_mhz(s.drive->amplitude) : 0.0),
            format_number(s.drive ? to_ghz(s.drive->frequency) : 0.0), format_number(s.drive ? s.drive->phase : 0.0)});
    }
    CsvTable t;
    t.kind = "fig6";
    t.meta = {{"window_ns", format_number(window)},
              {"ramp_ns", format_number(c.ramp_ns)},
              {"noon_fidelity", format_number(run.fidelity)},
              {"max_norm_drift", format_number(run.run.max_norm_drift)}};
    t.columns = {"t_ns", "q_window", "na_window", "nb_window", "q_raw", "na_raw", "nb_raw", "norm"};
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& r = run.run.samples[i];
        t.add_row({r.t, w[i].q, w[i].na, w[i].nb, r.q, r.na, r.nb, r.norm});
    }
    std::ostringstream a, b;
    write_csv(a, seg, &p);
    write_csv(b, t, &p);
    write_text_file(c.out_dir, "fig5_schedule.csv", a.str());
    const auto path = write_text_file(c.out_dir, "fig6.csv", b.str());
    std::printf("NOON N=3 fidelity %.6f\nnorm drift %.3e\nduration_ns %.3f\nseries %s\n", run.fidelity,
                run.run.max_norm_drift, run.schedule.span(), path.c_str());
    return 0;
}

int reproduce_method_vs_n(const Config& c, NoonMethod m) {
    const SystemParams p = load(c, dissipation_defaults());
    CsvTable t;
    t.kind = m == NoonMethod::m1 ? "fig8" : "fig9";
    t.meta = {{"method", to_string(m)}, {"n_traj", std::to_string(c.n_traj)}, {"seed", std::to_string(c.seed)}};
    t.columns = {"N", "t_q_ns", "F_closed", "F_recursion", "F_lindblad", "F_mcwf", "mcwf_std_error"};
    EvolveOptions o;
    o.threads = c.threads;
    for (double tq : {500.0, 1000.0}) {
        const DecoherenceParams dec{tq, p.t_r};
        for (int n = 1; n <= c.n_max; ++n) {
            const double closed = fidelity_closed(m, n, dec, p.rabi_omega, p.g_a);
            const double rec = fidelity_from_rho(m == NoonMethod::m1 ? method1_rho(n, dec, p.rabi_omega, p.g_a)
                                                                     : method2_rho(n, dec, p.rabi_omega, p.g_a));
            const auto lin = m == NoonMethod::m1 ? method1_lindblad(n, p, dec, o) : method2_lindblad(n, p, dec, o);
            const std::uint64_t seed = c.seed + std::uint64_t(n) * 1000 + std::uint64_t(tq);
            const auto tr = m == NoonMethod::m1 ? method1_trajectories(n, p, dec, c.n_traj, seed, o)
                                                : method2_trajectories(n, p, dec, c.n_traj, seed, o);
            t.add_row({double(n), tq, closed, rec, lin.lindblad, tr.mean_fidelity, tr.std_error});
            std::fprintf(stderr, "N=%d T_q=%g closed %.5f lindblad %.5f mcwf %.5f +- %.5f\n", n, tq, closed,
                         lin.lindblad, tr.mean_fidelity, tr.std_error);
        }
    }
    std::ostringstream os;
    write_csv(os, t, &p);
    std::cout << os.str();
    write_text_file(c.out_dir, t.kind + ".csv", os.str());
    return 0;
}

int reproduce_fig10(const Config& c) {
    const SystemParams p = load(c, dissipation_defaults());
    std::vector<double> tq = c.tq_ns;
    if (tq.empty())
        for (int k = 0; k < 20; ++k) tq.push_back(300.0 + k * (2000.0 - 300.0) / 19.0);
    CsvTable t;
    t.kind = "fig10";
    t.meta = {{"N", std::to_string(c.n)}, {"n_traj", std::to_string(c.n_traj)}, {"seed", std::to_string(c.seed)}};
    t.columns = {"t_q_ns",        "F_M1_closed", "F_M2_closed",    "F_M1_lindblad", "F_M2_lindblad",
                 "F_M1_mcwf",     "F_M1_mcwf_std_error", "F_M2_mcwf", "F_M2_mcwf_std_error"};
    EvolveOptions o;
    o.threads = c.threads;
    for (std::size_t k = 0; k < tq.size(); ++k) {
        const DecoherenceParams dec{tq[k], p.t_r};
        const std::uint64_t seed = c.seed + k;
        const auto t1 = method1_trajectories(c.n, p, dec, c.n_traj, seed, o);
        const auto t2 = method2_trajectories(c.n, p, dec, c.n_traj, seed, o);
        t.add_row({tq[k], fidelity_closed(NoonMethod::m1, c.n, dec, p.rabi_omega, p.g_a),
                   fidelity_closed(NoonMethod::m2, c.n, dec, p.rabi_omega, p.g_a), method1_lindblad(c.n, p, dec, o).lindblad,
                   method2_lindblad(c.n, p, dec, o).lindblad, t1.mean_fidelity, t1.std_error, t2.mean_fidelity,
                   t2.std_error});
        std::fprintf(stderr, "T_q=%g done\n", tq[k]);
    }
    std::ostringstream os;
    write_csv(os, t, &p);
    std::cout << os.str();
    write_text_file(c.out_dir, "fig10.csv", os.str());
    return 0;
}

int cmd_reproduce(const Config& c) {
    if (c.figure == "table1") return reproduce_table1(c);
    if (c.figure == "fig6") return reproduce_fig6(c);
    if (c.figure == "fig8") return reproduce_method_vs_n(c, NoonMethod::m1);
    if (c.figure == "fig9") return reproduce_method_vs_n(c, NoonMethod::m2);
    if (c.figure == "fig10") return reproduce_fig10(c);
    throw ValidationError("unknown figure '" + c.figure + "' (table1, fig6, fig8, fig9, fig10)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fockprog: pulse compiler and dissipative simulator for two resonators and a qubit/qutrit"};
    app.require_subcommand(1);
    Config c;

    auto common = [&](CLI::App* s) {
        s->add_option("--params", c.params_file, "parameter file (key = value, linear GHz/MHz)")->check(CLI::ExistingFile);
        s->add_option("--out", c.out_dir, "output directory")->capture_default_str();
    };
    auto run_opts = [&](CLI::App* s) {
        s->add_option("--target", c.target, "noon(N), max-entangled(N) or inline:{(na,nb):amp,...}");
        s->add_option("--program", c.program_file, "program file written by synthesize")->check(CLI::ExistingFile);
        s->add_option("--rule", c.rule, "addressing rule for synthesis")
            ->check(CLI::IsMember({"difference", "sum"}))
            ->capture_default_str();
        s->add_option("--levels", c.levels, "atom levels for synthesis")->check(CLI::IsMember({2, 3}))->capture_default_str();
        s->add_option("--mode", c.mode, "ideal | schedule")->check(CLI::IsMember({"ideal", "schedule"}))->capture_default_str();
        s->add_option("--dt-max-ns", c.dt_max_ns, "largest integrator step (0 = adaptive only)")
            ->check(CLI::NonNegativeNumber);
        s->add_option("--ramp-ns", c.ramp_ns, "shift-pulse ramp length")->check(CLI::NonNegativeNumber)->capture_default_str();
        s->add_option("--guard", c.guard, "extra Fock levels above the program's reach")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        s->add_option("--sample-every-ns", c.sample_every_ns, "sampling interval of the time series")
            ->capture_default_str();
        s->add_option("--window-ns", c.window_ns, "boxcar window for series_windowed.csv (0 = none)")
            ->check(CLI::NonNegativeNumber);
        s->add_option("--threads", c.threads, "worker threads for trajectories (0 = all cores)");
    };
    auto traj_opts = [&](CLI::App* s) {
        s->add_option("--seed", c.seed, "trajectory seed")->capture_default_str();
        s->add_option("--n-traj", c.n_traj, "number of trajectories")->check(CLI::PositiveNumber)->capture_default_str();
    };

    auto* syn = app.add_subcommand("synthesize", "compile a target state into a pulse program");
    common(syn);
    syn->add_option("--target", c.target, "noon(N), max-entangled(N) or inline:{(na,nb):amp,...}")->required();
    syn->add_option("--rule", c.rule, "addressing rule")->check(CLI::IsMember({"difference", "sum"}))->capture_default_str();
    syn->add_option("--levels", c.levels, "atom levels")->check(CLI::IsMember({2, 3}))->capture_default_str();

    auto* ri = app.add_subcommand("run-ideal", "step-by-step ideal population trace");
    common(ri);
    run_opts(ri);

    auto* sim = app.add_subcommand("simulate", "closed evolution in ideal or schedule mode");
    common(sim);
    run_opts(sim);

    auto* lin = app.add_subcommand("lindblad", "Lindblad evolution with T_q, T_r from the parameter file");
    common(lin);
    run_opts(lin);

    auto* tr = app.add_subcommand("trajectories", "quantum-trajectory average");
    common(tr);
    run_opts(tr);
    traj_opts(tr);

    auto* fs = app.add_subcommand("fidelity-sweep", "perturbative NOON fidelities vs N or T_q");
    common(fs);
    fs->add_option("--n-max", c.n_max, "largest N")->check(CLI::PositiveNumber)->capture_default_str();
    fs->add_option("--n", c.n, "N for a T_q sweep")->check(CLI::PositiveNumber)->capture_default_str();
    fs->add_option("--tq-ns", c.tq_ns, "T_q values; switches to a T_q sweep at --n");

    auto* rep = app.add_subcommand("reproduce", "emit a reproduction dataset");
    common(rep);
    traj_opts(rep);
    rep->add_option("figure", c.figure, "table1 | fig6 | fig8 | fig9 | fig10")->required();
    rep->add_option("--dt-max-ns", c.dt_max_ns, "largest integrator step")->check(CLI::NonNegativeNumber);
    rep->add_option("--ramp-ns", c.ramp_ns, "shift-pulse ramp (fig6)")->check(CLI::NonNegativeNumber)->capture_default_str();
    rep->add_option("--window-ns", c.window_ns, "averaging window (fig6, default 5)")->check(CLI::NonNegativeNumber);
    rep->add_option("--sample-every-ns", c.sample_every_ns, "sampling interval (fig6)")->capture_default_str();
    rep->add_option("--n-max", c.n_max, "largest N (fig8, fig9)")->check(CLI::PositiveNumber)->capture_default_str();
    rep->add_option("--n", c.n, "N (fig10)")->check(CLI::PositiveNumber)->capture_default_str();
    rep->add_option("--tq-ns", c.tq_ns, "T_q values (fig10, default 20 points on [300, 2000])");
    rep->add_option("--threads", c.threads, "worker threads for trajectories");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*syn) return cmd_synthesize(c);
        if (*ri) return cmd_run_ideal(c);
        if (*sim) return cmd_simulate(c);
        if (*lin) return cmd_lindblad(c);
        if (*tr) return cmd_trajectories(c);
        if (*fs) return cmd_fidelity_sweep(c);
        if (*rep) return cmd_reproduce(c);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

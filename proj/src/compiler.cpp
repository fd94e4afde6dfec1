#include "fockprog/compiler.hpp"

#include "fockprog/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fockprog {

namespace {

constexpr double kPi = std::numbers::pi;

// wrap into (-pi, pi]
double wrap_phase(double x) {
    double y = std::remainder(x, 2.0 * kPi);
    if (y <= -kPi) y += 2.0 * kPi;
    return y;
}

std::size_t idx(const HilbertSpace& sp, int q, int na, int nb) { return sp.index_unchecked(q, na, nb); }

}  // namespace

std::string_view kind_token(StepKind k) {
    switch (k) {
        case StepKind::rabi: return "RABI01";
        case StepKind::swap_a: return "SWAPA";
        case StepKind::swap_b: return "SWAPB";
        case StepKind::phase_shift: return "PHASE";
    }
    return "?";
}

StepKind parse_kind(std::string_view t) {
    if (t == "RABI01") return StepKind::rabi;
    if (t == "SWAPA") return StepKind::swap_a;
    if (t == "SWAPB") return StepKind::swap_b;
    if (t == "PHASE") return StepKind::phase_shift;
    throw ValidationError("unknown step kind '" + std::string(t) + "'");
}

// ---- amplitude tables -------------------------------------------------------

AmplitudeTable AmplitudeTable::from_state(const StateVector& s) {
    Matrix c = Matrix::Zero(s.space.na_max() + 1, s.space.nb_max() + 1);
    for (std::size_t i = 0; i < s.space.dim(); ++i) {
        const BasisLabel l = s.space.label(i);
        const cplx v = s.amps(static_cast<Eigen::Index>(i));
        if (l.q != 0) {
            if (std::abs(v) > 1e-12)
                throw ValidationError("target has amplitude on excited atom level " + to_string(l));
            continue;
        }
        c(l.na, l.nb) = v;
    }
    return AmplitudeTable(std::move(c));
}

int AmplitudeTable::support_na(double tol) const {
    for (auto na = c_.rows() - 1; na >= 0; --na)
        for (Eigen::Index nb = 0; nb < c_.cols(); ++nb)
            if (std::abs(c_(na, nb)) > tol) return static_cast<int>(na);
    return 0;
}

int AmplitudeTable::support_nb(double tol) const {
    for (auto nb = c_.cols() - 1; nb >= 0; --nb)
        for (Eigen::Index na = 0; na < c_.rows(); ++na)
            if (std::abs(c_(na, nb)) > tol) return static_cast<int>(nb);
    return 0;
}

cplx AmplitudeTable::operator()(int na, int nb) const {
    if (na < 0 || nb < 0) throw ValidationError("negative Fock index");
    if (na >= c_.rows() || nb >= c_.cols()) return {};
    return c_(na, nb);
}

void AmplitudeTable::set(int na, int nb, cplx v) {
    if (na < 0 || nb < 0) throw ValidationError("negative Fock index");
    if (na >= c_.rows() || nb >= c_.cols()) {
        Matrix bigger = Matrix::Zero(std::max<Eigen::Index>(na + 1, c_.rows()),
                                     std::max<Eigen::Index>(nb + 1, c_.cols()));
        bigger.topLeftCorner(c_.rows(), c_.cols()) = c_;
        c_ = std::move(bigger);
    }
    c_(na, nb) = v;
}

StateVector AmplitudeTable::to_state(const HilbertSpace& space) const {
    StateVector s = zero_state(space);
    for (Eigen::Index na = 0; na < c_.rows(); ++na)
        for (Eigen::Index nb = 0; nb < c_.cols(); ++nb) {
            if (c_(na, nb) == cplx{}) continue;
            s.amps(static_cast<Eigen::Index>(space.index(0, static_cast<int>(na), static_cast<int>(nb)))) =
                c_(na, nb);
        }
    return s;
}

AmplitudeTable noon_target(int n) {
    if (n < 1) throw ValidationError("NOON order must be >= 1");
    AmplitudeTable t(Matrix::Zero(n + 1, n + 1));
    t.set(n, 0, std::numbers::sqrt2 / 2);
    t.set(0, n, std::numbers::sqrt2 / 2);
    return t;
}

AmplitudeTable max_entangled_target(int n) {
    if (n < 0) throw ValidationError("max-entangled order must be >= 0");
    AmplitudeTable t(Matrix::Zero(n + 1, n + 1));
    const double c = 1.0 / std::sqrt(n + 1.0);
    for (int k = 0; k <= n; ++k) t.set(k, n - k, c);
    return t;
}

namespace {

// minimal recursive-descent reader for "{(na,nb):value, ...}"
struct TargetParser {
    std::string_view s;
    std::size_t pos = 0;

    void ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError("target spec: " + what + " at offset " + std::to_string(pos));
    }
    void expect(char c) {
        ws();
        if (pos >= s.size() || s[pos] != c) fail(std::string("expected '") + c + "'");
        ++pos;
    }
    bool peek(char c) {
        ws();
        return pos < s.size() && s[pos] == c;
    }
    int integer() {
        ws();
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) fail("expected integer");
        return std::stoi(std::string(s.substr(start, pos - start)));
    }
    double real() {
        ws();
        const std::string rest(s.substr(pos));
        const char* b = rest.c_str();
        char* e = nullptr;
        const double v = std::strtod(b, &e);
        if (e == b) fail("expected number");
        pos += static_cast<std::size_t>(e - b);
        return v;
    }
    // re | re(+|-)im i | im i
    cplx value() {
        const double first = real();
        ws();
        if (pos < s.size() && (s[pos] == 'i' || s[pos] == 'j')) {
            ++pos;
            return {0.0, first};
        }
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
            const double im = real();
            ws();
            if (pos >= s.size() || (s[pos] != 'i' && s[pos] != 'j')) fail("expected 'i'");
            ++pos;
            return {first, im};
        }
        return {first, 0.0};
    }
};

int parse_call_arg(const std::string& spec, const std::string& name) {
    const std::string inner = spec.substr(name.size() + 1, spec.size() - name.size() - 2);
    std::size_t used = 0;
    int n = 0;
    try {
        n = std::stoi(inner, &used);
    } catch (const std::exception&) {
        throw ValidationError("bad target spec '" + spec + "'");
    }
    if (used != inner.size()) throw ValidationError("bad target spec '" + spec + "'");
    return n;
}

}  // namespace

AmplitudeTable parse_target(const std::string& spec) {
    auto is_call = [&](const std::string& name) {
        return spec.rfind(name + "(", 0) == 0 && spec.back() == ')';
    };
    if (is_call("noon")) return noon_target(parse_call_arg(spec, "noon"));
    if (is_call("max-entangled")) return max_entangled_target(parse_call_arg(spec, "max-entangled"));
    if (spec.rfind("inline:", 0) != 0)
        throw ValidationError("target must be noon(N), max-entangled(N) or inline:{...}, got '" + spec + "'");
    TargetParser p{std::string_view(spec).substr(7)};
    AmplitudeTable t;
    p.expect('{');
    bool any = false;
    while (!p.peek('}')) {
        if (any) p.expect(',');
        p.expect('(');
        const int na = p.integer();
        p.expect(',');
        const int nb = p.integer();
        p.expect(')');
        p.expect(':');
        t.set(na, nb, t(na, nb) + p.value());
        any = true;
    }
    p.expect('}');
    p.ws();
    if (p.pos != p.s.size()) p.fail("trailing characters");
    return t;
}

// ---- programs ------------------------------------------------------------------

double step_time(const PulseStep& s, const ProgramRates& r) {
    double t = s.duration;
    if (s.kind == StepKind::rabi && s.phase_alpha != 0.0) t += 2.0 * std::abs(s.phase_alpha) / r.shift;
    return t;
}

double PulseProgram::duration() const {
    double t = 0.0;
    for (const auto& s : steps) t += step_time(s, rates);
    return t;
}

double PulseProgram::rotation_duration() const {
    double t = 0.0;
    for (const auto& s : steps)
        if (s.kind != StepKind::phase_shift) t += s.duration;
    return t;
}

std::size_t PulseProgram::count(StepKind k) const {
    return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(),
                                                  [k](const PulseStep& s) { return s.kind == k; }));
}

int PulseProgram::max_na() const {
    int m = target.support_na(1e-300);
    for (const auto& s : steps)
        if (s.kind == StepKind::swap_a) m = std::max(m, s.n_class);
    return m;
}

int PulseProgram::max_nb() const {
    int m = target.support_nb(1e-300);
    for (const auto& s : steps)
        if (s.kind == StepKind::swap_b) m = std::max(m, s.n_class);
    return m;
}

// ---- ideal maps -------------------------------------------------------------------

void apply_rabi_ideal(StateVector& s, AddressingRule rule, int n_class, double theta, double alpha,
                      double beta, double phi) {
    const HilbertSpace& sp = s.space;
    const double c = std::cos(theta / 2), sn = std::sin(theta / 2);
    const cplx ea = std::exp(cplx(0, alpha)), eb = std::exp(cplx(0, beta));
    const cplx spect0 = std::exp(cplx(0, phi)), spect1 = std::exp(cplx(0, -phi));
    for (int na = 0; na <= sp.na_max(); ++na)
        for (int nb = 0; nb <= sp.nb_max(); ++nb) {
            const auto i0 = static_cast<Eigen::Index>(idx(sp, 0, na, nb));
            const auto i1 = static_cast<Eigen::Index>(idx(sp, 1, na, nb));
            if (stark_class(rule, na, nb) == n_class) {
                const cplx c0 = s.amps(i0), c1 = s.amps(i1);
                s.amps(i0) = ea * c * c0 - cplx(0, 1) * eb * sn * c1;
                s.amps(i1) = std::conj(ea) * c * c1 - cplx(0, 1) * std::conj(eb) * sn * c0;
            } else if (phi != 0.0) {
                s.amps(i0) *= spect0;
                s.amps(i1) *= spect1;
            }
        }
}

StateVector apply_rabi_ideal(const StateVector& s, int n_class, double theta, double alpha,
                             double beta, double phi, AddressingRule rule) {
    StateVector out = s;
    apply_rabi_ideal(out, rule, n_class, theta, alpha, beta, phi);
    return out;
}

void apply_swap_angle(StateVector& s, Mode mode, double g_t) {
    const HilbertSpace& sp = s.space;
    for (int na = 0; na <= sp.na_max(); ++na)
        for (int nb = 0; nb <= sp.nb_max(); ++nb) {
            const int n = mode == Mode::a ? na : nb;
            if (n == 0) continue;
            const auto i0 = static_cast<Eigen::Index>(idx(sp, 0, na, nb));
            const auto i1 = static_cast<Eigen::Index>(
                mode == Mode::a ? idx(sp, 1, na - 1, nb) : idx(sp, 1, na, nb - 1));
            const double th = std::sqrt(double(n)) * g_t;
            const double c = std::cos(th), sn = std::sin(th);
            const cplx c0 = s.amps(i0), c1 = s.amps(i1);
            s.amps(i0) = c * c0 - cplx(0, sn) * c1;
            s.amps(i1) = c * c1 - cplx(0, sn) * c0;
        }
}

StateVector apply_swap_ideal(const StateVector& s, Mode mode, double duration, double g) {
    StateVector out = s;
    apply_swap_angle(out, mode, g * duration);
    return out;
}

void apply_phase_ideal(StateVector& s, double phi) {
    const HilbertSpace& sp = s.space;
    for (std::size_t i = 0; i < sp.dim(); ++i) {
        const int q = sp.label(i).q;
        if (q > 0) s.amps(static_cast<Eigen::Index>(i)) *= std::exp(cplx(0, -phi * q));
    }
}

namespace {

double swap_gt(const PulseStep& step) {
    if (step.n_class < 1) throw ValidationError("swap step needs ladder index >= 1");
    return step.theta / std::sqrt(double(step.n_class));
}

}  // namespace

void apply_step_ideal(StateVector& s, const PulseStep& step, AddressingRule rule, const ProgramRates&) {
    switch (step.kind) {
        case StepKind::rabi:
            apply_rabi_ideal(s, rule, step.n_class, step.theta, step.phase_alpha, step.phase_beta,
                             step.phase_alpha);
            break;
        case StepKind::swap_a: apply_swap_angle(s, Mode::a, swap_gt(step)); break;
        case StepKind::swap_b: apply_swap_angle(s, Mode::b, swap_gt(step)); break;
        case StepKind::phase_shift: apply_phase_ideal(s, step.theta); break;
    }
}

void apply_step_inverse(StateVector& s, const PulseStep& step, AddressingRule rule, const ProgramRates&) {
    switch (step.kind) {
        case StepKind::rabi: {
            // R(theta, alpha, beta) = Rot(theta, beta - alpha) after a global z phase alpha
            const double a = step.phase_alpha;
            if (a != 0.0) apply_rabi_ideal(s, rule, step.n_class, 0.0, -a, 0.0, -a);
            apply_rabi_ideal(s, rule, step.n_class, -step.theta, 0.0, step.phase_beta - a, 0.0);
            break;
        }
        case StepKind::swap_a: apply_swap_angle(s, Mode::a, -swap_gt(step)); break;
        case StepKind::swap_b: apply_swap_angle(s, Mode::b, -swap_gt(step)); break;
        case StepKind::phase_shift: apply_phase_ideal(s, -step.theta); break;
    }
}

// ---- synthesis ----------------------------------------------------------------------

namespace {

class InverseSolver {
public:
    InverseSolver(StateVector psi, const SystemParams& p, const SynthesisOptions& o)
        : psi_(std::move(psi)), rates_(ProgramRates::from(p)), opts_(o) {}

    // R^dagger of class c moving |1,na,nb> into |0,na,nb>
    void clear_excited(int na, int nb) {
        const auto& sp = psi_.space;
        const cplx c1 = psi_.amps(static_cast<Eigen::Index>(idx(sp, 1, na, nb)));
        const cplx c0 = psi_.amps(static_cast<Eigen::Index>(idx(sp, 0, na, nb)));
        if (std::abs(c1) < opts_.zero_tol) return;
        PulseStep st;
        st.kind = StepKind::rabi;
        st.theta = 2.0 * std::atan2(std::abs(c1), std::abs(c0));
        st.n_class = stark_class(opts_.rule, na, nb);
        const double beta = std::abs(c0) < opts_.zero_tol ? 0.0 : wrap_phase(std::arg(c0) - std::arg(c1) - kPi / 2);
        st.drive_phase = beta;
        st.phase_beta = beta;
        st.duration = st.theta / rates_.rabi;
        push(st);
    }

    // swap^dagger moving |0,na,nb> into |1,na-1,nb> (mode a) or |1,na,nb-1> (mode b)
    void clear_ground(Mode mode, int na, int nb) {
        const auto& sp = psi_.space;
        const auto i0 = static_cast<Eigen::Index>(idx(sp, 0, na, nb));
        const auto i1 = static_cast<Eigen::Index>(mode == Mode::a ? idx(sp, 1, na - 1, nb) : idx(sp, 1, na, nb - 1));
        if (std::abs(psi_.amps(i0)) < opts_.zero_tol) return;
        if (std::abs(psi_.amps(i1)) >= opts_.zero_tol) {
            // swap^dagger zeroes |0> only when arg c0 - arg c1 = -pi/2
            const double phi = wrap_phase(std::arg(psi_.amps(i0)) - std::arg(psi_.amps(i1)) + kPi / 2);
            if (phi != 0.0) emit_phase(phi);
        }
        const int n = mode == Mode::a ? na : nb;
        const double g = mode == Mode::a ? rates_.g_a : rates_.g_b;
        PulseStep st;
        st.kind = mode == Mode::a ? StepKind::swap_a : StepKind::swap_b;
        st.theta = std::atan2(std::abs(psi_.amps(i0)), std::abs(psi_.amps(i1)));
        st.n_class = n;
        st.duration = st.theta / (g * std::sqrt(double(n)));
        push(st);
    }

    std::vector<PulseStep> take_forward() {
        std::reverse(inverse_.begin(), inverse_.end());
        return std::move(inverse_);
    }
    const StateVector& state() const { return psi_; }

private:
    // Forward order puts this phase right before the step emitted last. A
    // Rabi step absorbs it into its alpha (R Z(g) = Z(g) Rot(theta, beta-alpha-2g));
    // at the very end of the forward program it acts on q=0 only and drops out.
    void emit_phase(double phi) {
        PulseStep ph;
        ph.kind = StepKind::phase_shift;
        ph.theta = phi;
        ph.phase_alpha = ph.phase_beta = phi / 2;
        ph.duration = std::abs(phi) / rates_.shift;
        if (inverse_.empty()) {
            apply_step_inverse(psi_, ph, opts_.rule, rates_);
            return;
        }
        PulseStep& last = inverse_.back();
        if (last.kind == StepKind::rabi) {
            apply_step_inverse(psi_, ph, opts_.rule, rates_);
            last.phase_alpha = wrap_phase(last.phase_alpha + phi / 2);
            last.phase_beta = wrap_phase(last.phase_beta - phi / 2);
            last.drive_phase = wrap_phase(last.phase_beta - last.phase_alpha);
            return;
        }
        push(ph);
    }

    void push(const PulseStep& st) {
        apply_step_inverse(psi_, st, opts_.rule, rates_);
        inverse_.push_back(st);
    }

    StateVector psi_;
    ProgramRates rates_;
    SynthesisOptions opts_;
    std::vector<PulseStep> inverse_;
};

}  // namespace

PulseProgram synthesize(const AmplitudeTable& target, const SystemParams& params,
                        const SynthesisOptions& opts) {
    const double n2 = target.norm_sq();
    if (!(std::abs(n2 - 1.0) <= 1e-10))
        throw ValidationError("target not normalized: sum |c|^2 = " + std::to_string(n2));
    if (opts.atom_levels != 2 && opts.atom_levels != 3) throw ValidationError("atom_levels must be 2 or 3");
    const int na_sup = target.support_na(), nb_sup = target.support_nb();
    if ((opts.na_limit >= 0 && na_sup > opts.na_limit) || (opts.nb_limit >= 0 && nb_sup > opts.nb_limit))
        throw ValidationError("target support (" + std::to_string(na_sup) + "," + std::to_string(nb_sup) +
                              ") exceeds truncation");

    const HilbertSpace work(2, na_sup, nb_sup);
    InverseSolver solver(target.to_state(work), params, opts);

    // rows top to bottom; along a row right-to-left (difference) or left-to-right (sum)
    for (int j = nb_sup; j >= 1; --j) {
        for (int step = 0; step <= na_sup; ++step) {
            const int k = opts.rule == AddressingRule::difference ? na_sup - step : step;
            solver.clear_ground(Mode::b, k, j);
            solver.clear_excited(k, j - 1);
        }
    }
    for (int k = na_sup; k >= 1; --k) {
        solver.clear_ground(Mode::a, k, 0);
        solver.clear_excited(k - 1, 0);
    }

    PulseProgram prog;
    prog.steps = solver.take_forward();
    prog.target = target;
    prog.atom_levels = opts.atom_levels;
    prog.rule = opts.rule;
    prog.rates = ProgramRates::from(params);
    prog.params_hash = params.hash();
    return prog;
}

PulseProgram noon_program(int n, const SystemParams& params, int truncation) {
    if (n < 1) throw ValidationError("NOON order must be >= 1");
    if (truncation >= 0 && truncation < n)
        throw ValidationError("truncation " + std::to_string(truncation) + " too small for NOON order " +
                              std::to_string(n));
    PulseProgram prog;
    prog.target = noon_target(n);
    prog.rates = ProgramRates::from(params);
    prog.params_hash = params.hash();
    auto rabi = [&](double theta, int cls) {
        PulseStep s;
        s.kind = StepKind::rabi;
        s.theta = theta;
        s.n_class = cls;
        s.duration = theta / params.rabi_omega;
        prog.steps.push_back(s);
    };
    auto swap = [&](StepKind k, int ladder) {
        PulseStep s;
        s.kind = k;
        s.theta = kPi / 2;
        s.n_class = ladder;
        const double g = k == StepKind::swap_a ? params.g_a : params.g_b;
        s.duration = s.theta / (g * std::sqrt(double(ladder)));
        prog.steps.push_back(s);
    };
    for (int j = 1; j <= n; ++j) {
        rabi(j == 1 ? kPi / 2 : kPi, j - 1);
        swap(StepKind::swap_a, j);
    }
    for (int j = 1; j <= n; ++j) {
        rabi(kPi, -(j - 1));
        swap(StepKind::swap_b, j);
    }
    return prog;
}

StateVector run_ideal(const PulseProgram& program, const StateVector& initial) {
    return run_ideal(program, initial, nullptr);
}

StateVector run_ideal(const PulseProgram& program, const StateVector& initial,
                      const std::function<void(std::size_t, const StateVector&)>& after_step) {
    const HilbertSpace& sp = initial.space;
    if (sp.qubit_levels() != program.atom_levels)
        throw ValidationError("program compiled for " + std::to_string(program.atom_levels) +
                              "-level atom, space has " + std::to_string(sp.qubit_levels()));
    if (program.max_na() > sp.na_max() || program.max_nb() > sp.nb_max())
        throw ValidationError("program needs Fock levels (" + std::to_string(program.max_na()) + "," +
                              std::to_string(program.max_nb()) + ") beyond the space truncation");
    StateVector s = initial;
    for (std::size_t i = 0; i < program.steps.size(); ++i) {
        apply_step_ideal(s, program.steps[i], program.rule, program.rates);
        if (after_step) after_step(i, s);
    }
    return s;
}

HilbertSpace ideal_space(const PulseProgram& program, int guard) {
    return HilbertSpace(program.atom_levels, program.max_na() + guard, program.max_nb() + guard);
}

// ---- bounds ----------------------------------------------------------------------------

double t_max_bound(int na, int nb, const ProgramRates& r) {
    double t = (na + nb + double(na) * nb) * kPi / r.rabi;
    for (int j = 1; j <= na; ++j) t += kPi / (2.0 * r.g_a * std::sqrt(double(j)));
    double sb = 0.0;
    for (int j = 1; j <= nb; ++j) sb += kPi / (2.0 * r.g_b * std::sqrt(double(j)));
    return t + (na + 1) * sb;
}

double t_noon_bound(int n, const ProgramRates& r) {
    double t = (2.0 * n - 0.5) * kPi / r.rabi;
    for (int j = 1; j <= n; ++j) t += kPi / (2.0 * r.g_a * std::sqrt(double(j)));
    for (int j = 1; j <= n; ++j) t += kPi / (2.0 * r.g_b * std::sqrt(double(j)));
    return t;
}

ProgramBounds program_bounds(int na, int nb, const ProgramRates& r) {
    ProgramBounds b;
    b.t_max = t_max_bound(na, nb, r);
    b.t_noon = na == nb && na > 0 ? t_noon_bound(na, r) : 0.0;
    return b;
}

ProgramBounds program_bounds(const PulseProgram& program) {
    ProgramBounds b = program_bounds(program.target.support_na(), program.target.support_nb(), program.rates);
    b.program_duration = program.duration();
    return b;
}

std::size_t step_pair_bound(int n_max) { return 2u * static_cast<std::size_t>(n_max) * (n_max + 1); }

// ---- serialization ---------------------------------------------------------------------

namespace {

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double read_double(std::istringstream& is, const std::string& what) {
    std::string tok;
    if (!(is >> tok)) throw ValidationError("program: missing " + what);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw ValidationError("program: bad " + what + " '" + tok + "'");
    return v;
}

}  // namespace

void write_program(std::ostream& out, const PulseProgram& p) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(p.params_hash));
    out << "# fockprog-program v1\n";
    out << "# params_hash " << hash << "\n";
    out << "# addressing " << to_string(p.rule) << "\n";
    out << "# atom_levels " << p.atom_levels << "\n";
    out << "# rates " << num17(p.rates.rabi) << " " << num17(p.rates.g_a) << " " << num17(p.rates.g_b) << " "
        << num17(p.rates.shift) << "\n";
    const Matrix& c = p.target.matrix();
    out << "# target " << c.rows() << " " << c.cols() << "\n";
    for (Eigen::Index na = 0; na < c.rows(); ++na)
        for (Eigen::Index nb = 0; nb < c.cols(); ++nb)
            if (c(na, nb) != cplx{})
                out << "# amp " << na << " " << nb << " " << num17(c(na, nb).real()) << " "
                    << num17(c(na, nb).imag()) << "\n";
    out << "# KIND theta_rad n_class drive_phase_rad alpha_rad beta_rad duration_ns\n";
    for (const auto& s : p.steps)
        out << kind_token(s.kind) << " " << num17(s.theta) << " " << s.n_class << " " << num17(s.drive_phase)
            << " " << num17(s.phase_alpha) << " " << num17(s.phase_beta) << " " << num17(s.duration) << "\n";
}

PulseProgram read_program(std::istream& in) {
    PulseProgram p;
    std::string line;
    bool have_magic = false;
    Matrix amps;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        if (line[0] == '#') {
            std::string hashmark, key;
            is >> hashmark >> key;
            if (key == "fockprog-program") {
                std::string ver;
                is >> ver;
                if (ver != "v1") throw ValidationError("program: unsupported version " + ver);
                have_magic = true;
            } else if (key == "params_hash") {
                std::string h;
                is >> h;
                p.params_hash = std::stoull(h, nullptr, 16);
            } else if (key == "addressing") {
                std::string r;
                is >> r;
                p.rule = parse_rule(r);
            } else if (key == "atom_levels") {
                is >> p.atom_levels;
                if (p.atom_levels != 2 && p.atom_levels != 3) throw ValidationError("program: bad atom_levels");
            } else if (key == "rates") {
                p.rates.rabi = read_double(is, "rabi rate");
                p.rates.g_a = read_double(is, "g_a");
                p.rates.g_b = read_double(is, "g_b");
                p.rates.shift = read_double(is, "shift rate");
            } else if (key == "target") {
                Eigen::Index r = 0, c = 0;
                if (!(is >> r >> c) || r < 1 || c < 1) throw ValidationError("program: bad target shape");
                amps = Matrix::Zero(r, c);
            } else if (key == "amp") {
                int na = -1, nb = -1;
                is >> na >> nb;
                if (na < 0 || nb < 0 || na >= amps.rows() || nb >= amps.cols())
                    throw ValidationError("program: amp outside target shape");
                const double re = read_double(is, "amp re");
                const double im = read_double(is, "amp im");
                amps(na, nb) = cplx(re, im);
            }
            continue;
        }
        std::string kind;
        is >> kind;
        PulseStep s;
        s.kind = parse_kind(kind);
        s.theta = read_double(is, "theta");
        if (!(is >> s.n_class)) throw ValidationError("program: bad n_class");
        s.drive_phase = read_double(is, "drive_phase");
        s.phase_alpha = read_double(is, "alpha");
        s.phase_beta = read_double(is, "beta");
        s.duration = read_double(is, "duration");
        std::string extra;
        if (is >> extra) throw ValidationError("program: trailing token '" + extra + "'");
        if (s.duration < 0 || !std::isfinite(s.duration)) throw ValidationError("program: bad duration");
        p.steps.push_back(s);
    }
    if (!have_magic) throw ValidationError("program: missing '# fockprog-program v1' header");
    if (amps.size() > 0) p.target = AmplitudeTable(amps);
    return p;
}

void save_program(const std::string& path, const PulseProgram& program) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot write " + path);
    write_program(f, program);
}

PulseProgram load_program(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open " + path);
    return read_program(f);
}

}  // namespace fockprog

#include "fockprog/model.hpp"

#include "fockprog/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace fockprog {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0)) throw ValidationError(std::string(name) + " must be > 0");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "inf" || t == "Inf" || t == "infinity") return kInf;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw ValidationError("params: bad number for " + key + ": '" + t + "'");
    }
    if (used != t.size()) throw ValidationError("params: trailing text for " + key + ": '" + t + "'");
    return v;
}

}  // namespace

std::vector<std::string> SystemParams::validate() const {
    require_positive(omega_q, "omega_q");
    require_positive(omega_12, "omega_12");
    require_positive(omega_a, "omega_a");
    require_positive(omega_b, "omega_b");
    require_positive(g_a, "g_a");
    require_positive(g_b, "g_b");
    require_positive(rabi_omega, "rabi_omega");
    require_positive(t_q, "t_q");
    require_positive(t_r, "t_r");
    require_positive(shift_omega, "shift_omega");
    std::vector<std::string> warn;
    char buf[160];
    const double ra = g_a / std::abs(omega_q - omega_a);
    const double rb = g_b / std::abs(omega_q - omega_b);
    if (ra > 0.2) {
        std::snprintf(buf, sizeof buf, "g_a/|w_q - w_a| = %.3g exceeds 0.2: not dispersive", ra);
        warn.emplace_back(buf);
    }
    if (rb > 0.2) {
        std::snprintf(buf, sizeof buf, "g_b/|w_q - w_b| = %.3g exceeds 0.2: not dispersive", rb);
        warn.emplace_back(buf);
    }
    return warn;
}

void DecoherenceParams::validate() const {
    require_positive(t_q, "t_q");
    require_positive(t_r, "t_r");
}

std::uint64_t SystemParams::hash() const {
    std::ostringstream os;
    write_params(os, *this);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

SystemParams parse_params(std::istream& in) {
    static const char* const required[] = {"omega_q_ghz", "omega_12_ghz", "omega_a_ghz",
                                           "omega_b_ghz", "g_a_mhz",      "g_b_mhz",
                                           "rabi_mhz",    "t_q_ns",       "t_r_ns"};
    std::map<std::string, double> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("params line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (kv.count(key)) throw ValidationError("params: duplicate key " + key);
        kv[key] = parse_number(key, line.substr(eq + 1));
    }
    for (const char* k : required)
        if (!kv.count(k)) throw ValidationError(std::string("params: missing key ") + k);
    for (const auto& [k, v] : kv) {
        bool known = k == "shift_mhz";
        for (const char* r : required) known = known || k == r;
        if (!known) throw ValidationError("params: unknown key " + k);
    }
    SystemParams p;
    p.omega_q = ghz(kv["omega_q_ghz"]);
    p.omega_12 = ghz(kv["omega_12_ghz"]);
    p.omega_a = ghz(kv["omega_a_ghz"]);
    p.omega_b = ghz(kv["omega_b_ghz"]);
    p.g_a = mhz(kv["g_a_mhz"]);
    p.g_b = mhz(kv["g_b_mhz"]);
    p.rabi_omega = mhz(kv["rabi_mhz"]);
    p.t_q = kv["t_q_ns"];
    p.t_r = kv["t_r_ns"];
    if (kv.count("shift_mhz")) p.shift_omega = mhz(kv["shift_mhz"]);
    p.validate();
    return p;
}

SystemParams load_params(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open params file " + path);
    return parse_params(f);
}

void write_params(std::ostream& out, const SystemParams& p) {
    auto num = [](double v) {
        if (std::isinf(v)) return std::string("inf");
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "omega_q_ghz = " << num(to_ghz(p.omega_q)) << "\n"
        << "omega_12_ghz = " << num(to_ghz(p.omega_12)) << "\n"
        << "omega_a_ghz = " << num(to_ghz(p.omega_a)) << "\n"
        << "omega_b_ghz = " << num(to_ghz(p.omega_b)) << "\n"
        << "g_a_mhz = " << num(to_mhz(p.g_a)) << "\n"
        << "g_b_mhz = " << num(to_mhz(p.g_b)) << "\n"
        << "rabi_mhz = " << num(to_mhz(p.rabi_omega)) << "\n"
        << "t_q_ns = " << num(p.t_q) << "\n"
        << "t_r_ns = " << num(p.t_r) << "\n"
        << "shift_mhz = " << num(to_mhz(p.shift_omega)) << "\n";
}

std::string to_string(AddressingRule r) { return r == AddressingRule::difference ? "difference" : "sum"; }

AddressingRule parse_rule(const std::string& s) {
    if (s == "difference") return AddressingRule::difference;
    if (s == "sum") return AddressingRule::sum;
    throw ValidationError("unknown addressing rule '" + s + "'");
}

DispersiveMap make_dispersive_map(const SystemParams& p, int atom_levels) {
    DispersiveMap m;
    if (atom_levels == 2) {
        m.rule = AddressingRule::difference;
        m.delta_omega = 2.0 * p.g_a * p.g_a / (p.omega_q - p.omega_a);
    } else if (atom_levels == 3) {
        m.rule = AddressingRule::sum;
        const double w00 = qutrit_drive_frequency(p, 0, 0);
        m.delta_omega_0 = w00 - p.omega_q;
        m.delta_omega = qutrit_drive_frequency(p, 1, 0) - w00;
    } else {
        throw ValidationError("atom_levels must be 2 or 3");
    }
    return m;
}

Operator static_hamiltonian(const HilbertSpace& space, const SystemParams& p, double omega_q_now,
                            double frame_omega) {
    const auto d = static_cast<Eigen::Index>(space.dim());
    Operator h{space, Matrix::Zero(d, d), true};
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const BasisLabel l = space.label(i);
        double e = l.na * p.omega_a + l.nb * p.omega_b;
        if (l.q >= 1) e += omega_q_now;
        if (l.q == 2) e += p.omega_12;
        e -= frame_omega * (l.q + l.na + l.nb);
        h.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = e;
    }
    const Matrix sm = atom_lowering(space).m;
    const Matrix a = mode_lowering(space, Mode::a).m;
    const Matrix b = mode_lowering(space, Mode::b).m;
    const Matrix ca = p.g_a * (sm.adjoint() * a);
    const Matrix cb = p.g_b * (sm.adjoint() * b);
    h.m += ca + ca.adjoint() + cb + cb.adjoint();
    return h;
}

Operator sigma_plus_01(const HilbertSpace& space) {
    const auto d = static_cast<Eigen::Index>(space.dim());
    Operator op{space, Matrix::Zero(d, d), false};
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const BasisLabel l = space.label(i);
        if (l.q != 0) continue;
        op.m(static_cast<Eigen::Index>(space.index_unchecked(1, l.na, l.nb)),
             static_cast<Eigen::Index>(i)) = 1.0;
    }
    return op;
}

Operator drive_term(const HilbertSpace& space, double amplitude, double drive_freq, double phase,
                    double t) {
    if (amplitude < 0.0) throw ValidationError("drive amplitude must be >= 0");
    const Matrix sp = sigma_plus_01(space).m;
    const cplx c = 0.5 * amplitude * std::exp(cplx(0.0, -(drive_freq * t + phase)));
    return {space, c * sp + std::conj(c) * sp.adjoint(), true};
}

double dispersive_energy(const SystemParams& p, int q, int na, int nb) {
    const double sa = p.g_a * p.g_a / (p.omega_q - p.omega_a);
    const double sb = p.g_b * p.g_b / (p.omega_q - p.omega_b);
    const double bare = na * p.omega_a + nb * p.omega_b;
    if (q == 0) return bare - sa * na - sb * nb;
    if (q == 1) return p.omega_q + bare + sa * (na + 1) + sb * (nb + 1);
    throw ValidationError("dispersive_energy: q must be 0 or 1");
}

double transition_frequency(const SystemParams& p, int na, int nb) {
    return dispersive_energy(p, 1, na, nb) - dispersive_energy(p, 0, na, nb);
}

SymmetricShift symmetric_shift(const SystemParams& p, double rel_tol) {
    SymmetricShift s;
    s.shift_a = p.g_a * p.g_a / (p.omega_q - p.omega_a);
    s.shift_b = p.g_b * p.g_b / (p.omega_b - p.omega_q);
    s.holds = std::abs(s.shift_a - s.shift_b) <= rel_tol * std::max(std::abs(s.shift_a), std::abs(s.shift_b));
    return s;
}

double qutrit_shift_a(const SystemParams& p) {
    const double g2 = p.g_a * p.g_a;
    return 2.0 * g2 / (p.omega_q - p.omega_a) + 2.0 * g2 / (p.omega_a - p.omega_12);
}

double qutrit_shift_b(const SystemParams& p) {
    const double g2 = p.g_b * p.g_b;
    return 2.0 * g2 / (p.omega_q - p.omega_b) + 2.0 * g2 / (p.omega_b - p.omega_12);
}

double qutrit_drive_frequency(const SystemParams& p, int na, int nb) {
    constexpr double lambda_sq = 2.0;
    const double ga2 = p.g_a * p.g_a, gb2 = p.g_b * p.g_b;
    return p.omega_q + ga2 * (2 * na + 1) / (p.omega_q - p.omega_a) +
           ga2 * lambda_sq * na / (p.omega_a - p.omega_12) +
           gb2 * (2 * nb + 1) / (p.omega_q - p.omega_b) +
           gb2 * lambda_sq * nb / (p.omega_b - p.omega_12);
}

std::vector<std::string> qutrit_ordering_warnings(const SystemParams& p) {
    std::vector<std::string> w;
    if (!(p.omega_a < p.omega_12 && p.omega_12 < p.omega_q && p.omega_q < p.omega_b))
        w.emplace_back("qutrit frequencies violate w_a < w_12 < w_01 < w_b");
    return w;
}

double drive_frequency(const SystemParams& p, const DispersiveMap& map, int n) {
    if (map.rule == AddressingRule::difference) {
        const SymmetricShift s = symmetric_shift(p);
        if (!s.holds) {
            char buf[200];
            std::snprintf(buf, sizeof buf,
                          "asymmetric Stark shifts: g_a^2/(w_q-w_a) = %.9g MHz, g_b^2/(w_b-w_q) = %.9g MHz",
                          to_mhz(s.shift_a), to_mhz(s.shift_b));
            throw ValidationError(buf);
        }
        return p.omega_q + n * map.delta_omega;
    }
    const double sa = qutrit_shift_a(p), sb = qutrit_shift_b(p);
    if (std::abs(sa - sb) > 1e-6 * std::max(std::abs(sa), std::abs(sb))) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "unequal qutrit Stark shifts: a = %.9g MHz, b = %.9g MHz",
                      to_mhz(sa), to_mhz(sb));
        throw ValidationError(buf);
    }
    return p.omega_q + map.delta_omega_0 + n * map.delta_omega;
}

StateVector DressedSpectrum::state(int q, int na, int nb) const {
    return {space, vectors.col(static_cast<Eigen::Index>(space.index(q, na, nb)))};
}

DressedSpectrum dressed_spectrum(const HilbertSpace& space, const SystemParams& p,
                                 double omega_q_now, double frame_omega) {
    const Matrix h = static_hamiltonian(space, p, omega_q_now, frame_omega).m;
    const auto d = static_cast<Eigen::Index>(space.dim());
    DressedSpectrum out{space, Eigen::VectorXd::Zero(d), Matrix::Zero(d, d)};

    std::map<int, std::vector<Eigen::Index>> blocks;
    for (Eigen::Index i = 0; i < d; ++i) {
        const BasisLabel l = space.label(static_cast<std::size_t>(i));
        blocks[l.q + l.na + l.nb].push_back(i);
    }
    for (const auto& [excitations, idx] : blocks) {
        const auto n = static_cast<Eigen::Index>(idx.size());
        Matrix sub(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c) sub(r, c) = h(idx[r], idx[c]);
        Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
        const Matrix& v = es.eigenvectors();

        std::vector<bool> bare_used(n, false), eig_used(n, false);
        for (Eigen::Index round = 0; round < n; ++round) {
            double best = -1.0;
            Eigen::Index bi = 0, ek = 0;
            for (Eigen::Index r = 0; r < n; ++r) {
                if (bare_used[r]) continue;
                for (Eigen::Index k = 0; k < n; ++k) {
                    if (eig_used[k]) continue;
                    const double o = std::norm(v(r, k));
                    if (o > best) best = o, bi = r, ek = k;
                }
            }
            bare_used[bi] = eig_used[ek] = true;
            // phase convention: the bare component is real and positive
            const cplx ph = std::abs(v(bi, ek)) > 0 ? std::conj(v(bi, ek)) / std::abs(v(bi, ek)) : cplx{1.0};
            out.energies(idx[bi]) = es.eigenvalues()(ek);
            for (Eigen::Index r = 0; r < n; ++r) out.vectors(idx[r], idx[bi]) = ph * v(r, ek);
        }
    }
    return out;
}

}  // namespace fockprog

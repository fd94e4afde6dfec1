#include "fockprog/hilbert.hpp"

#include "fockprog/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace fockprog {

std::string to_string(const BasisLabel& l) {
    return "|" + std::to_string(l.q) + "," + std::to_string(l.na) + "," + std::to_string(l.nb) + ">";
}

HilbertSpace::HilbertSpace(int qubit_levels, int na_max, int nb_max)
    : levels_(qubit_levels), na_max_(na_max), nb_max_(nb_max) {
    if (qubit_levels != 2 && qubit_levels != 3)
        throw ValidationError("qubit_levels must be 2 or 3, got " + std::to_string(qubit_levels));
    if (na_max < 0 || nb_max < 0)
        throw ValidationError("Fock truncations must be non-negative");
    dim_ = static_cast<std::size_t>(levels_) * (na_max_ + 1) * (nb_max_ + 1);
}

std::size_t HilbertSpace::index(int q, int na, int nb) const {
    if (!contains(q, na, nb))
        throw ValidationError("basis label " + to_string({q, na, nb}) + " outside truncation (" +
                              std::to_string(levels_) + "," + std::to_string(na_max_) + "," +
                              std::to_string(nb_max_) + ")");
    return index_unchecked(q, na, nb);
}

BasisLabel HilbertSpace::label(std::size_t idx) const {
    if (idx >= dim_) throw ValidationError("basis index out of range");
    const auto nb_dim = static_cast<std::size_t>(nb_max_ + 1);
    const auto na_dim = static_cast<std::size_t>(na_max_ + 1);
    BasisLabel l;
    l.nb = static_cast<int>(idx % nb_dim);
    idx /= nb_dim;
    l.na = static_cast<int>(idx % na_dim);
    l.q = static_cast<int>(idx / na_dim);
    return l;
}

HilbertSpace make_space(int qubit_levels, int na_max, int nb_max) {
    return HilbertSpace(qubit_levels, na_max, nb_max);
}

void check_hermitian(const Operator& op, double tol, const char* what) {
    const double err = (op.m - op.m.adjoint()).cwiseAbs().maxCoeff();
    if (!(err <= tol))
        throw ValidationError(std::string(what) + " not Hermitian: max |H - H^dag| = " +
                              std::to_string(err));
}

void check_normalized(const StateVector& s, double tol) {
    const double n = s.amps.norm();
    if (!(std::abs(n - 1.0) <= tol))
        throw ValidationError("state not normalized: norm = " + std::to_string(n));
}

void check_density(const DensityMatrix& rho, double herm_tol, double trace_tol, double eig_tol) {
    const double herm = (rho.m - rho.m.adjoint()).cwiseAbs().maxCoeff();
    if (!(herm <= herm_tol))
        throw ValidationError("density matrix not Hermitian: " + std::to_string(herm));
    const double tr = rho.m.trace().real();
    if (!(std::abs(tr - 1.0) <= trace_tol))
        throw ValidationError("density matrix trace " + std::to_string(tr));
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho.m + rho.m.adjoint()),
                                             Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < -eig_tol)
        throw ValidationError("density matrix has negative eigenvalue " + std::to_string(lo));
}

StateVector basis_state(const HilbertSpace& space, int q, int na, int nb) {
    StateVector s{space, Vector::Zero(static_cast<Eigen::Index>(space.dim()))};
    s.amps(space.index(q, na, nb)) = 1.0;
    return s;
}

StateVector zero_state(const HilbertSpace& space) {
    return {space, Vector::Zero(static_cast<Eigen::Index>(space.dim()))};
}

DensityMatrix pure_density(const StateVector& s) { return {s.space, s.amps * s.amps.adjoint()}; }

namespace {

Operator zero_op(const HilbertSpace& space) {
    const auto d = static_cast<Eigen::Index>(space.dim());
    return {space, Matrix::Zero(d, d), false};
}

}  // namespace

Operator identity(const HilbertSpace& space) {
    const auto d = static_cast<Eigen::Index>(space.dim());
    return {space, Matrix::Identity(d, d), true};
}

Operator mode_lowering(const HilbertSpace& space, Mode mode) {
    Operator op = zero_op(space);
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const BasisLabel l = space.label(i);
        const int n = mode == Mode::a ? l.na : l.nb;
        if (n == 0) continue;
        const std::size_t j = mode == Mode::a ? space.index_unchecked(l.q, l.na - 1, l.nb)
                                              : space.index_unchecked(l.q, l.na, l.nb - 1);
        op.m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::sqrt(double(n));
    }
    return op;
}

Operator atom_lowering(const HilbertSpace& space) {
    Operator op = zero_op(space);
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const BasisLabel l = space.label(i);
        if (l.q == 0) continue;
        const std::size_t j = space.index_unchecked(l.q - 1, l.na, l.nb);
        // qutrit 1<->2 element carries the harmonic sqrt(2)
        op.m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::sqrt(double(l.q));
    }
    return op;
}

Operator number_operator(const HilbertSpace& space, Mode mode) {
    Operator op = zero_op(space);
    op.hermitian = true;
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const BasisLabel l = space.label(i);
        op.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = mode == Mode::a ? l.na : l.nb;
    }
    return op;
}

Operator atom_number(const HilbertSpace& space) {
    Operator op = zero_op(space);
    op.hermitian = true;
    for (std::size_t i = 0; i < space.dim(); ++i)
        op.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = space.label(i).q;
    return op;
}

Operator atom_projector(const HilbertSpace& space, int level) {
    Operator op = zero_op(space);
    op.hermitian = true;
    for (std::size_t i = 0; i < space.dim(); ++i)
        if (space.label(i).q == level)
            op.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    return op;
}

StateVector apply(const Operator& op, const StateVector& s) {
    if (!(op.space == s.space)) throw ValidationError("apply: space mismatch");
    return {s.space, op.m * s.amps};
}

cplx inner(const StateVector& a, const StateVector& b) {
    if (!(a.space == b.space)) throw ValidationError("inner: space mismatch");
    return a.amps.dot(b.amps);  // Eigen's dot conjugates the first argument
}

double fidelity(const StateVector& psi, const StateVector& target) {
    return std::norm(inner(target, psi));
}

double fidelity(const DensityMatrix& rho, const StateVector& target) {
    if (!(rho.space == target.space)) throw ValidationError("fidelity: space mismatch");
    return (target.amps.adjoint() * rho.m * target.amps)(0, 0).real();
}

Moments moments(const StateVector& s) {
    Moments m;
    for (std::size_t i = 0; i < s.space.dim(); ++i) {
        const double p = std::norm(s.amps(static_cast<Eigen::Index>(i)));
        const BasisLabel l = s.space.label(i);
        m.q += p * l.q;
        m.na += p * l.na;
        m.nb += p * l.nb;
        m.norm += p;
    }
    m.norm = std::sqrt(m.norm);
    return m;
}

Moments moments(const DensityMatrix& rho) {
    Moments m;
    for (std::size_t i = 0; i < rho.space.dim(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double p = rho.m(ii, ii).real();
        const BasisLabel l = rho.space.label(i);
        m.q += p * l.q;
        m.na += p * l.na;
        m.nb += p * l.nb;
        m.norm += p;
    }
    return m;
}

StateVector embed(const StateVector& s, const HilbertSpace& into) {
    StateVector out = zero_state(into);
    for (std::size_t i = 0; i < s.space.dim(); ++i) {
        const cplx c = s.amps(static_cast<Eigen::Index>(i));
        if (c == cplx{}) continue;
        const BasisLabel l = s.space.label(i);
        if (!into.contains(l.q, l.na, l.nb))
            throw ValidationError("embed: amplitude on " + to_string(l) + " outside target space");
        out.amps(static_cast<Eigen::Index>(into.index_unchecked(l.q, l.na, l.nb))) = c;
    }
    return out;
}

}  // namespace fockprog

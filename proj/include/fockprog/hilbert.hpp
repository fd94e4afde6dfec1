#pragma once

// Truncated atom (2 or 3 levels) x resonator a x resonator b.
//
// Basis ordering: q slowest, then n_a, then n_b fastest:
//   index(q, na, nb) = (q * (na_max + 1) + na) * (nb_max + 1) + nb

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <string>

namespace fockprog {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class Mode { a, b };

struct BasisLabel {
    int q = 0;
    int na = 0;
    int nb = 0;
    friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

std::string to_string(const BasisLabel& l);

class HilbertSpace {
public:
    HilbertSpace() = default;
    HilbertSpace(int qubit_levels, int na_max, int nb_max);

    int qubit_levels() const { return levels_; }
    int na_max() const { return na_max_; }
    int nb_max() const { return nb_max_; }
    std::size_t dim() const { return dim_; }

    bool contains(int q, int na, int nb) const {
        return q >= 0 && q < levels_ && na >= 0 && na <= na_max_ && nb >= 0 && nb <= nb_max_;
    }
    // throws ValidationError when out of range
    std::size_t index(int q, int na, int nb) const;
    std::size_t index_unchecked(int q, int na, int nb) const {
        return (static_cast<std::size_t>(q) * (na_max_ + 1) + na) * (nb_max_ + 1) + nb;
    }
    BasisLabel label(std::size_t idx) const;

    friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

private:
    int levels_ = 2;
    int na_max_ = 0;
    int nb_max_ = 0;
    std::size_t dim_ = 2;
};

HilbertSpace make_space(int qubit_levels, int na_max, int nb_max);

struct Operator {
    HilbertSpace space;
    Matrix m;
    bool hermitian = false;  // when set, verified at construction via check_hermitian

    Operator adjoint() const { return {space, m.adjoint(), hermitian}; }
};

struct StateVector {
    HilbertSpace space;
    Vector amps;

    double norm() const { return amps.norm(); }
    cplx amp(int q, int na, int nb) const { return amps(space.index(q, na, nb)); }
};

struct DensityMatrix {
    HilbertSpace space;
    Matrix m;
};

// Throws ValidationError naming `what` if the check fails.
void check_hermitian(const Operator& op, double tol = 1e-12, const char* what = "operator");
void check_normalized(const StateVector& s, double tol = 1e-10);
void check_density(const DensityMatrix& rho, double herm_tol = 1e-10, double trace_tol = 1e-8,
                   double eig_tol = 1e-8);

StateVector basis_state(const HilbertSpace& space, int q, int na, int nb);
StateVector zero_state(const HilbertSpace& space);
DensityMatrix pure_density(const StateVector& s);

Operator identity(const HilbertSpace& space);
Operator mode_lowering(const HilbertSpace& space, Mode mode);
// |0><1| for two levels; |0><1| + sqrt(2)|1><2| for three
Operator atom_lowering(const HilbertSpace& space);
Operator number_operator(const HilbertSpace& space, Mode mode);
// diag(q)
Operator atom_number(const HilbertSpace& space);
// |k><k| on the atom, identity on the modes
Operator atom_projector(const HilbertSpace& space, int level);

StateVector apply(const Operator& op, const StateVector& s);
cplx inner(const StateVector& a, const StateVector& b);

// |<target|psi>|^2 and <target|rho|target>
double fidelity(const StateVector& psi, const StateVector& target);
double fidelity(const DensityMatrix& rho, const StateVector& target);

// Diagonal moments <q>, <n_a>, <n_b> and the norm (or trace) in the bare basis.
struct Moments {
    double q = 0, na = 0, nb = 0, norm = 0;
};
Moments moments(const StateVector& s);
Moments moments(const DensityMatrix& rho);

// Embed a state into a larger (or equal) truncation; throws if amplitude would be lost.
StateVector embed(const StateVector& s, const HilbertSpace& into);

}  // namespace fockprog

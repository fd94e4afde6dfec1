#pragma once

// CSR storage for the integrators. Operators are built dense (see hilbert.hpp)
// and converted once per segment.

#include "fockprog/hilbert.hpp"
#include "fockprog/kernels.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fockprog {

class CsrMatrix {
public:
    CsrMatrix() = default;
    // Entries with |v| <= drop are not stored.
    static CsrMatrix from_dense(const Matrix& m, double drop = 0.0);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }
    kernels::CsrView view() const;
    Matrix to_dense() const;

    std::vector<cplx>& values() { return values_; }
    const std::vector<cplx>& values() const { return values_; }

private:
    friend class PatternedSum;
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::int32_t> row_ptr_{0};
    std::vector<std::int32_t> col_idx_;
    std::vector<cplx> values_;
};

// A(t) = sum_k c_k(t) A_k with every A_k scattered onto the union pattern,
// so that assembling the current matrix is a handful of axpy calls.
class PatternedSum {
public:
    PatternedSum() = default;
    explicit PatternedSum(std::span<const Matrix> terms);

    std::size_t terms() const { return term_values_.size(); }
    std::size_t rows() const { return sum_.rows(); }
    void assemble(std::span<const cplx> coeffs);
    const CsrMatrix& current() const { return sum_; }
    kernels::CsrView view() const { return sum_.view(); }

private:
    CsrMatrix sum_;
    std::vector<std::vector<cplx>> term_values_;
};

}  // namespace fockprog

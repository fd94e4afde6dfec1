#include "fockprog/sparse.hpp"

#include "fockprog/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fockprog {

CsrMatrix CsrMatrix::from_dense(const Matrix& m, double drop) {
    CsrMatrix c;
    c.rows_ = static_cast<std::size_t>(m.rows());
    c.cols_ = static_cast<std::size_t>(m.cols());
    c.row_ptr_.assign(1, 0);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (std::abs(m(r, k)) > drop) {
                c.col_idx_.push_back(static_cast<std::int32_t>(k));
                c.values_.push_back(m(r, k));
            }
        }
        c.row_ptr_.push_back(static_cast<std::int32_t>(c.values_.size()));
    }
    return c;
}

kernels::CsrView CsrMatrix::view() const {
    return {rows_, cols_, row_ptr_.data(), col_idx_.data(), values_.data()};
}

Matrix CsrMatrix::to_dense() const {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t r = 0; r < rows_; ++r)
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            m(static_cast<Eigen::Index>(r), col_idx_[k]) = values_[k];
    return m;
}

PatternedSum::PatternedSum(std::span<const Matrix> terms) {
    if (terms.empty()) throw ValidationError("PatternedSum needs at least one term");
    const auto n = terms[0].rows();
    Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(n, n);
    for (const Matrix& t : terms) {
        if (t.rows() != n || t.cols() != n) throw ValidationError("PatternedSum: shape mismatch");
        mask += t.cwiseAbs();
    }
    sum_ = CsrMatrix::from_dense(mask.cast<cplx>(), 0.0);
    term_values_.reserve(terms.size());
    for (const Matrix& t : terms) {
        std::vector<cplx> v(sum_.nnz());
        for (std::size_t r = 0; r < sum_.rows_; ++r)
            for (auto k = sum_.row_ptr_[r]; k < sum_.row_ptr_[r + 1]; ++k)
                v[static_cast<std::size_t>(k)] = t(static_cast<Eigen::Index>(r), sum_.col_idx_[k]);
        term_values_.push_back(std::move(v));
    }
}

void PatternedSum::assemble(std::span<const cplx> coeffs) {
    const auto& kt = kernels::active();
    std::fill(sum_.values_.begin(), sum_.values_.end(), cplx{});
    const std::size_t nnz = sum_.values_.size();
    for (std::size_t k = 0; k < term_values_.size(); ++k) {
        const cplx c = k < coeffs.size() ? coeffs[k] : cplx{1.0};
        if (c == cplx{}) continue;
        kt.axpy(c, term_values_[k].data(), sum_.values_.data(), nnz);
    }
}

}  // namespace fockprog

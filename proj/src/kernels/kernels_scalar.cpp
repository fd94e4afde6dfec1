#include "fockprog/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace fockprog::kernels::scalar {
namespace {

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
    const double ar = a.real(), ai = a.imag();
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] = cplx(y[i].real() + ar * xr - ai * xi, y[i].imag() + ar * xi + ai * xr);
    }
}

cplx dotc(const cplx* x, const cplx* y, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        const double yr = y[i].real(), yi = y[i].imag();
        re += xr * yr + xi * yi;
        im += xr * yi - xi * yr;
    }
    return {re, im};
}

double norm_sq(const cplx* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

void csr_matvec(const CsrView& a, const cplx* x, cplx* y) {
    for (std::size_t r = 0; r < a.rows; ++r) {
        double re = 0.0, im = 0.0;
        for (std::int32_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            const cplx v = a.values[k];
            const cplx xv = x[a.col_idx[k]];
            re += v.real() * xv.real() - v.imag() * xv.imag();
            im += v.real() * xv.imag() + v.imag() * xv.real();
        }
        y[r] = {re, im};
    }
}

void csr_matmat(const CsrView& a, const cplx* b, std::size_t ncols, cplx* c) {
    for (std::size_t r = 0; r < a.rows; ++r) {
        cplx* crow = c + r * ncols;
        std::fill(crow, crow + ncols, cplx{});
        for (std::int32_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
            axpy(a.values[k], b + static_cast<std::size_t>(a.col_idx[k]) * ncols, crow, ncols);
    }
}

double scaled_error(const cplx* err, const cplx* y0, const cplx* y1, std::size_t n, double atol,
                    double rtol) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        worst = std::max(worst, std::abs(err[i]) / scale);
    }
    return worst;
}

constexpr KernelTable kTable{axpy, dotc, norm_sq, csr_matvec, csr_matmat, scaled_error};

}  // namespace

const KernelTable& table() { return kTable; }

}  // namespace fockprog::kernels::scalar

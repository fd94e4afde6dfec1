// AVX2 + FMA variants. This file is compiled with -mavx2 -mfma and must only
// be entered after the dispatcher has confirmed CPU support.

#include "fockprog/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace fockprog::kernels::avx2 {
namespace {

// Two packed complex numbers: [re0, im0, re1, im1].
inline __m256d cmul(__m256d a_re, __m256d a_im, __m256d x) {
    const __m256d x_swap = _mm256_permute_pd(x, 0b0101);
    return _mm256_fmaddsub_pd(a_re, x, _mm256_mul_pd(a_im, x_swap));
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
    const __m256d a_re = _mm256_set1_pd(a.real());
    const __m256d a_im = _mm256_set1_pd(a.imag());
    auto* xd = reinterpret_cast<const double*>(x);
    auto* yd = reinterpret_cast<double*>(y);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x0 = _mm256_loadu_pd(xd + 2 * i);
        const __m256d x1 = _mm256_loadu_pd(xd + 2 * i + 4);
        const __m256d y0 = _mm256_loadu_pd(yd + 2 * i);
        const __m256d y1 = _mm256_loadu_pd(yd + 2 * i + 4);
        _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(y0, cmul(a_re, a_im, x0)));
        _mm256_storeu_pd(yd + 2 * i + 4, _mm256_add_pd(y1, cmul(a_re, a_im, x1)));
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d x0 = _mm256_loadu_pd(xd + 2 * i);
        const __m256d y0 = _mm256_loadu_pd(yd + 2 * i);
        _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(y0, cmul(a_re, a_im, x0)));
    }
    for (; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] = cplx(y[i].real() + a.real() * xr - a.imag() * xi,
                    y[i].imag() + a.real() * xi + a.imag() * xr);
    }
}

cplx dotc(const cplx* x, const cplx* y, std::size_t n) {
    auto* xd = reinterpret_cast<const double*>(x);
    auto* yd = reinterpret_cast<const double*>(y);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        const __m256d yv = _mm256_loadu_pd(yd + 2 * i);
        acc_re = _mm256_fmadd_pd(xv, yv, acc_re);
        acc_im = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0b0101), acc_im);
    }
    // acc_im lanes hold [xr*yi, xi*yr, ...]; the imaginary part is even - odd.
    const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
    double re = hsum(acc_re);
    double im = hsum(_mm256_mul_pd(acc_im, sign));
    for (; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

double norm_sq(const cplx* x, std::size_t n) {
    auto* xd = reinterpret_cast<const double*>(x);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(xd + 2 * i);
        const __m256d b = _mm256_loadu_pd(xd + 2 * i + 4);
        acc0 = _mm256_fmadd_pd(a, a, acc0);
        acc1 = _mm256_fmadd_pd(b, b, acc1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d a = _mm256_loadu_pd(xd + 2 * i);
        acc0 = _mm256_fmadd_pd(a, a, acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

void csr_matvec(const CsrView& a, const cplx* x, cplx* y) {
    auto* xd = reinterpret_cast<const double*>(x);
    auto* vd = reinterpret_cast<const double*>(a.values);
    for (std::size_t r = 0; r < a.rows; ++r) {
        std::int32_t k = a.row_ptr[r];
        const std::int32_t end = a.row_ptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        for (; k + 2 <= end; k += 2) {
            const __m256d v = _mm256_loadu_pd(vd + 2 * k);
            const __m256d xv = _mm256_set_m128d(_mm_loadu_pd(xd + 2 * a.col_idx[k + 1]),
                                                _mm_loadu_pd(xd + 2 * a.col_idx[k]));
            const __m256d v_re = _mm256_movedup_pd(v);
            const __m256d v_im = _mm256_permute_pd(v, 0b1111);
            acc = _mm256_add_pd(acc, cmul(v_re, v_im, xv));
        }
        const __m128d s = _mm_add_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
        double re = _mm_cvtsd_f64(s);
        double im = _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
        if (k < end) {
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
    auto* ed = reinterpret_cast<const double*>(err);
    auto* ad = reinterpret_cast<const double*>(y0);
    auto* bd = reinterpret_cast<const double*>(y1);
    const __m256d vatol = _mm256_set1_pd(atol);
    const __m256d vrtol = _mm256_set1_pd(rtol);
    __m256d worst = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d e = _mm256_loadu_pd(ed + 2 * i);
        const __m256d p = _mm256_loadu_pd(ad + 2 * i);
        const __m256d q = _mm256_loadu_pd(bd + 2 * i);
        // hadd leaves |z|^2 duplicated in both lanes of each complex slot
        const __m256d em = _mm256_sqrt_pd(_mm256_hadd_pd(_mm256_mul_pd(e, e), _mm256_mul_pd(e, e)));
        const __m256d pm = _mm256_sqrt_pd(_mm256_hadd_pd(_mm256_mul_pd(p, p), _mm256_mul_pd(p, p)));
        const __m256d qm = _mm256_sqrt_pd(_mm256_hadd_pd(_mm256_mul_pd(q, q), _mm256_mul_pd(q, q)));
        const __m256d scale = _mm256_fmadd_pd(vrtol, _mm256_max_pd(pm, qm), vatol);
        worst = _mm256_max_pd(worst, _mm256_div_pd(em, scale));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, worst);
    double w = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
    for (; i < n; ++i) {
        const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        w = std::max(w, std::abs(err[i]) / scale);
    }
    return w;
}

constexpr KernelTable kTable{axpy, dotc, norm_sq, csr_matvec, csr_matmat, scaled_error};

}  // namespace

const KernelTable& table() { return kTable; }

}  // namespace fockprog::kernels::avx2

#pragma once

// Dense/sparse complex inner loops used by the integrators.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2+FMA variant compiled in its own translation unit. The variant is
// picked once at startup from CPUID; FOCKPROG_ISA=scalar in the environment
// (or force_isa) pins the reference path.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace fockprog::kernels {

using cplx = std::complex<double>;

/// Non-owning view of a CSR matrix. Column indices within a row are sorted.
struct CsrView {
    std::size_t rows = 0;
    std::size_t cols = 0;
    const std::int32_t* row_ptr = nullptr;  // rows + 1 entries
    const std::int32_t* col_idx = nullptr;
    const cplx* values = nullptr;
};

struct KernelTable {
    // y += a * x
    void (*axpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
    // sum_i conj(x_i) * y_i
    cplx (*dotc)(const cplx* x, const cplx* y, std::size_t n);
    // sum_i |x_i|^2
    double (*norm_sq)(const cplx* x, std::size_t n);
    // y = A x
    void (*csr_matvec)(const CsrView& a, const cplx* x, cplx* y);
    // C = A B, B and C dense row-major with `ncols` columns
    void (*csr_matmat)(const CsrView& a, const cplx* b, std::size_t ncols, cplx* c);
    // max_i |err_i| / (atol + rtol * max(|y0_i|, |y1_i|))
    double (*scaled_error)(const cplx* err, const cplx* y0, const cplx* y1, std::size_t n,
                           double atol, double rtol);
};

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best ISA the running CPU supports (and this build was compiled for).
Isa detected_isa();

/// Whether `isa` can run here.
bool isa_available(Isa isa);

/// Table for a specific ISA. Throws std::invalid_argument if unavailable.
const KernelTable& table(Isa isa);

/// The table currently used by the library.
const KernelTable& active();
Isa active_isa();

/// Pin the library to `isa` (tests use this to cross-check variants).
void force_isa(Isa isa);

namespace scalar {
const KernelTable& table();
}

#if defined(FOCKPROG_HAVE_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif

}  // namespace fockprog::kernels

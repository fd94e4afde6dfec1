#include <doctest.h>

#include "fockprog/kernels.hpp"
#include "fockprog/sparse.hpp"

#include <random>
#include <vector>

using namespace fockprog;
namespace k = fockprog::kernels;

namespace {

std::vector<cplx> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> nd;
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx(nd(rng), nd(rng));
    return v;
}

Matrix random_sparse(std::mt19937_64& rng, int n, double fill) {
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u(0, 1);
    Matrix m = Matrix::Zero(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (u(rng) < fill) m(r, c) = cplx(nd(rng), nd(rng));
    return m;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("scalar kernels against Eigen") {
    std::mt19937_64 rng(1);
    const auto& s = k::scalar::table();
    for (std::size_t n : {0u, 1u, 5u, 32u}) {
        auto x = random_vec(rng, n), y = random_vec(rng, n);
        Eigen::Map<Vector> ex(x.data(), Eigen::Index(n)), ey(y.data(), Eigen::Index(n));
        CHECK(std::abs(s.dotc(x.data(), y.data(), n) - ex.dot(ey)) < 1e-12);
        CHECK(std::abs(s.norm_sq(x.data(), n) - ex.squaredNorm()) < 1e-12);
        const Vector want = ey + cplx(0.3, -1.2) * ex;
        s.axpy(cplx(0.3, -1.2), x.data(), y.data(), n);
        CHECK((ey - want).norm() < 1e-12);
    }
    const Matrix m = random_sparse(rng, 17, 0.3);
    const auto csr = CsrMatrix::from_dense(m);
    CHECK((csr.to_dense() - m).norm() == 0.0);
    auto x = random_vec(rng, 17);
    std::vector<cplx> y(17);
    s.csr_matvec(csr.view(), x.data(), y.data());
    const Vector want = m * Eigen::Map<Vector>(x.data(), 17);
    CHECK((Eigen::Map<Vector>(y.data(), 17) - want).norm() < 1e-12);
}

TEST_CASE("SIMD variants agree with the scalar reference") {
    if (!k::isa_available(k::Isa::avx2)) {
        MESSAGE("AVX2 not available; only the scalar path is exercised");
        return;
    }
    const auto& s = k::table(k::Isa::scalar);
    const auto& v = k::table(k::Isa::avx2);
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = std::size_t(trial % 37);
        auto x = random_vec(rng, n), y = random_vec(rng, n), e = random_vec(rng, n);
        const cplx a(0.7 * trial - 3, 1.1);
        CHECK(std::abs(s.dotc(x.data(), y.data(), n) - v.dotc(x.data(), y.data(), n)) < 1e-12 * (1 + n));
        CHECK(std::abs(s.norm_sq(x.data(), n) - v.norm_sq(x.data(), n)) < 1e-12 * (1 + n));
        auto y1 = y, y2 = y;
        s.axpy(a, x.data(), y1.data(), n);
        v.axpy(a, x.data(), y2.data(), n);
        CHECK(max_diff(y1, y2) < 1e-13);
        for (auto& z : e) z *= 1e-6;
        CHECK(std::abs(s.scaled_error(e.data(), x.data(), y.data(), n, 1e-9, 1e-7) -
                       v.scaled_error(e.data(), x.data(), y.data(), n, 1e-9, 1e-7)) < 1e-9);
    }
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + trial;
        const Matrix m = random_sparse(rng, n, trial % 2 ? 0.1 : 0.4);
        const auto csr = CsrMatrix::from_dense(m);
        auto x = random_vec(rng, std::size_t(n));
        std::vector<cplx> y1(static_cast<std::size_t>(n)), y2(static_cast<std::size_t>(n));
        s.csr_matvec(csr.view(), x.data(), y1.data());
        v.csr_matvec(csr.view(), x.data(), y2.data());
        CHECK(max_diff(y1, y2) < 1e-12);
        const std::size_t nc = std::size_t(n);
        auto b = random_vec(rng, nc * nc);
        std::vector<cplx> c1(nc * nc), c2(nc * nc);
        s.csr_matmat(csr.view(), b.data(), nc, c1.data());
        v.csr_matmat(csr.view(), b.data(), nc, c2.data());
        CHECK(max_diff(c1, c2) < 1e-12);
    }
}

TEST_CASE("dispatch") {
    CHECK(k::isa_available(k::Isa::scalar));
    const auto before = k::active_isa();
    k::force_isa(k::Isa::scalar);
    CHECK(k::active_isa() == k::Isa::scalar);
    CHECK(&k::active() == &k::scalar::table());
    k::force_isa(before);
    CHECK(k::isa_name(k::Isa::avx2) == "avx2");
}

TEST_CASE("patterned sum assembles linear combinations") {
    std::mt19937_64 rng(4);
    const Matrix a = random_sparse(rng, 12, 0.2), b = random_sparse(rng, 12, 0.2), c = random_sparse(rng, 12, 0.05);
    const std::vector<Matrix> terms{a, b, c};
    PatternedSum sum(terms);
    const std::vector<cplx> coeff{cplx(1.0), cplx(0.5, -2), cplx(0, 3)};
    sum.assemble(coeff);
    CHECK((sum.current().to_dense() - (a + coeff[1] * b + coeff[2] * c)).norm() < 1e-12);
}

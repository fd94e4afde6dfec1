#include "fockprog/integrator.hpp"

#include "fockprog/errors.hpp"
#include "fockprog/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fockprog {

namespace {

// Dormand-Prince tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b5 - b4 (embedded fourth-order) difference weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

Dopri5::Dopri5(std::size_t n, Rhs f, OdeOptions opt) : n_(n), f_(std::move(f)), opt_(opt) {
    if (!(opt_.rtol > 0.0) || !(opt_.atol >= 0.0)) throw ValidationError("ODE tolerances must be positive");
    for (auto& k : k_) k.resize(n);
    for (auto& k : tk_) k.resize(n);
    y5_.resize(n);
    err_.resize(n);
    y0_.resize(n);
    tmp_.resize(n);
    terr_.resize(n);
    ttmp_.resize(n);
}

// Stages 2..7 given k[0] = f(t, y). Writes the 5th-order result and the error vector.
void Dopri5::stages(double t, const cplx* y, double h, std::vector<cplx>* k, cplx* y5, cplx* err) {
    const std::size_t n = n_;
    cplx* tmp = (k == k_ ? tmp_ : ttmp_).data();
    const cplx *k1 = k[0].data();
    cplx *k2 = k[1].data(), *k3 = k[2].data(), *k4 = k[3].data(), *k5 = k[4].data(), *k6 = k[5].data(),
         *k7 = k[6].data();

    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a21 * k1[i]);
    f_(t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f_(t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f_(t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f_(t + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f_(t + h, tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
        y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f_(t + h, y5, k7);
    stats_.rhs_evals += 6;
    if (err)
        for (std::size_t i = 0; i < n; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
}

double Dopri5::initial_step(double t, const cplx* y, double span) {
    // Hairer, Norsett & Wanner, II.4
    auto rms = [&](const cplx* v, const cplx* scale_from) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sc = opt_.atol + opt_.rtol * std::abs(scale_from[i]);
            s += std::norm(v[i]) / (sc * sc);
        }
        return std::sqrt(s / double(std::max<std::size_t>(n_, 1)));
    };
    const double d0 = rms(y, y), d1 = rms(k_[0].data(), y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h0 * k_[0][i];
    f_(t + h0, tmp_.data(), k_[1].data());
    ++stats_.rhs_evals;
    for (std::size_t i = 0; i < n_; ++i) err_[i] = k_[1][i] - k_[0][i];
    const double d2 = rms(err_.data(), y) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    return std::min(100.0 * h0, h1);
}

void Dopri5::integrate(double& t, double t_end, cplx* y, const Hook& hook) {
    if (!(t_end >= t)) throw ValidationError("integrate: t_end before t");
    if (t_end == t) return;
    const auto& kt = kernels::active();
    f_(t, y, k_[0].data());
    ++stats_.rhs_evals;
    if (h_ <= 0.0) h_ = initial_step(t, y, t_end - t);
    if (opt_.h_max > 0.0) h_ = std::min(h_, opt_.h_max);

    std::size_t steps = 0;
    bool last_rejected = false;
    while (t < t_end) {
        if (++steps > opt_.max_steps) {
            std::ostringstream os;
            os << "integrator exceeded " << opt_.max_steps << " steps at t = " << t << " ns";
            throw NumericalError(os.str());
        }
        double h = h_;
        bool last = false;
        if (t + h >= t_end || t_end - (t + h) < 1e-12 * std::max(1.0, std::abs(t_end))) {
            h = t_end - t;
            last = true;
        }
        stages(t, y, h, k_, y5_.data(), err_.data());
        const double err = kt.scaled_error(err_.data(), y, y5_.data(), n_, opt_.atol, opt_.rtol);
        if (!std::isfinite(err)) {
            std::ostringstream os;
            os << "non-finite integrator state at t = " << t << " ns";
            throw NumericalError(os.str());
        }
        if (err <= 1.0) {
            const double t0 = t;
            std::copy(y, y + n_, y0_.begin());
            std::copy(y5_.begin(), y5_.end(), y);
            t = last ? t_end : t + h;
            ++stats_.accepted;
            double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            if (!last || h >= h_) h_ = h * fac;
            if (opt_.h_max > 0.0) h_ = std::min(h_, opt_.h_max);
            last_rejected = false;
            std::swap(k_[0], k_[6]);
            if (hook) {
                double t1 = t;
                if (hook(t0, y0_.data(), t1, y)) {
                    t = t1;
                    if (t < t_end) {
                        f_(t, y, k_[0].data());
                        ++stats_.rhs_evals;
                    }
                }
            }
        } else {
            ++stats_.rejected;
            last_rejected = true;
            h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h_ < opt_.h_min * std::max(1.0, std::abs(t))) {
                std::ostringstream os;
                os << "step size underflow (h = " << h_ << " ns) at t = " << t << " ns";
                throw NumericalError(os.str());
            }
        }
    }
}

void Dopri5::trial_step(double t, const cplx* y, double h, cplx* out) {
    f_(t, y, tk_[0].data());
    ++stats_.rhs_evals;
    stages(t, y, h, tk_, out, nullptr);
}

}  // namespace fockprog

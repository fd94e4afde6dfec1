#pragma once

// Dormand-Prince 5(4) with FSAL and PI-free classic step control.
// The state is a flat complex array so the same stepper serves state
// vectors, unnormalized trajectories and row-major density matrices.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace fockprog {

using cplx = std::complex<double>;

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double h_max = 0.0;  // 0 = unbounded
    double h_min = 1e-13;
    std::size_t max_steps = 100'000'000;
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

class Dopri5 {
public:
    using Rhs = std::function<void(double t, const cplx* y, cplx* dy)>;
    // Called after every accepted step. May move t1 back (to t0 < t1' <= t1)
    // and overwrite y1; return true when it did, which drops the FSAL stage.
    using Hook = std::function<bool(double t0, const cplx* y0, double& t1, cplx* y1)>;

    Dopri5(std::size_t n, Rhs f, OdeOptions opt = {});

    // Advance y from t to t_end in place. Throws NumericalError on step underflow.
    void integrate(double& t, double t_end, cplx* y, const Hook& hook = {});

    // One fifth-order step of fixed size h, no error control. Safe to call from a hook.
    void trial_step(double t, const cplx* y, double h, cplx* out);

    const OdeStats& stats() const { return stats_; }
    std::size_t size() const { return n_; }
    const OdeOptions& options() const { return opt_; }

private:
    void stages(double t, const cplx* y, double h, std::vector<cplx>* k, cplx* y5, cplx* err);
    double initial_step(double t, const cplx* y, double span);

    std::size_t n_;
    Rhs f_;
    OdeOptions opt_;
    OdeStats stats_;
    std::vector<cplx> k_[7], y5_, err_, y0_, tmp_;
    std::vector<cplx> tk_[7], terr_, ttmp_;
    double h_ = 0.0;  // last proposed step, reused across calls
};

}  // namespace fockprog

// Closed, Lindblad and trajectory engines over a PiecewiseHamiltonian.

#include "fockprog/dynamics.hpp"
#include "fockprog/errors.hpp"
#include "fockprog/kernels.hpp"
#include "fockprog/sparse.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace fockprog {

void PiecewiseHamiltonian::push_constant(const Matrix& h, double duration, std::size_t step) {
    if (duration < 0.0) throw ValidationError("segment duration must be >= 0");
    if (dim == 0) dim = static_cast<std::size_t>(h.rows());
    if (static_cast<std::size_t>(h.rows()) != dim) throw ValidationError("segment dimension mismatch");
    const double t0 = t_end();
    term_sets.push_back({h});
    segments.push_back({t0, t0 + duration, term_sets.size() - 1, {}, step});
}

std::vector<Matrix> collapse_operators(const HilbertSpace& space, const DecoherenceParams& dec) {
    dec.validate();
    std::vector<Matrix> out;
    if (dec.gamma_q() > 0.0) out.push_back(std::sqrt(dec.gamma_q()) * atom_lowering(space).m);
    if (dec.gamma_r() > 0.0) {
        out.push_back(std::sqrt(dec.gamma_r()) * mode_lowering(space, Mode::a).m);
        out.push_back(std::sqrt(dec.gamma_r()) * mode_lowering(space, Mode::b).m);
    }
    return out;
}

Observables observables(const HilbertSpace& space) {
    const auto d = static_cast<Eigen::Index>(space.dim());
    Observables o{Eigen::VectorXd(d), Eigen::VectorXd(d), Eigen::VectorXd(d)};
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto l = space.label(static_cast<std::size_t>(i));
        o.q(i) = l.q;
        o.na(i) = l.na;
        o.nb(i) = l.nb;
    }
    return o;
}

namespace {

// K(t) = -i H(t) - (1/2) sum L^dag L, assembled on demand.
class Generator {
public:
    Generator(const PiecewiseHamiltonian& h, std::span<const Matrix> collapse) : h_(&h) {
        if (h.dim == 0 && !h.segments.empty()) throw ValidationError("Hamiltonian has no dimension");
        const auto d = static_cast<Eigen::Index>(h.dim);
        Matrix decay = Matrix::Zero(d, d);
        for (const Matrix& l : collapse) {
            if (l.rows() != d || l.cols() != d) throw ValidationError("collapse operator dimension mismatch");
            decay -= 0.5 * (l.adjoint() * l);
            jumps_.push_back(CsrMatrix::from_dense(l));
        }
        const bool lossy = !collapse.empty();
        for (const auto& set : h.term_sets) {
            std::vector<Matrix> terms;
            for (const Matrix& t : set) {
                if (t.rows() != d) throw ValidationError("term dimension mismatch");
                terms.push_back(cplx(0, -1) * t);
            }
            if (lossy) terms.push_back(decay);
            sums_.emplace_back(terms);
            counts_.push_back(set.size());
        }
    }

    void select(std::size_t seg) {
        seg_ = &h_->segments[seg];
        set_ = seg_->set;
        coeffs_.assign(counts_[set_], cplx{1.0});
        if (!seg_->coeffs) sums_[set_].assemble({});
        last_t_ = std::nan("");
    }

    void at(double t) {
        if (!seg_->coeffs || t == last_t_) return;
        seg_->coeffs(t, coeffs_.data());
        sums_[set_].assemble(coeffs_);
        last_t_ = t;
    }

    kernels::CsrView k() const { return sums_[set_].view(); }
    const std::vector<CsrMatrix>& jumps() const { return jumps_; }

private:
    const PiecewiseHamiltonian* h_;
    const PiecewiseHamiltonian::Segment* seg_ = nullptr;
    std::size_t set_ = 0;
    std::vector<PatternedSum> sums_;
    std::vector<std::size_t> counts_;
    std::vector<cplx> coeffs_;
    std::vector<CsrMatrix> jumps_;
    double last_t_ = 0.0;
};

OdeOptions ode_options(const EvolveOptions& o, double rtol_default, double atol_default = 1e-12) {
    OdeOptions ode;
    ode.rtol = o.rtol > 0.0 ? o.rtol : rtol_default;
    ode.atol = o.atol > 0.0 ? o.atol : atol_default;
    ode.h_max = o.dt_max;
    if (o.dt_max < 0.0) throw ValidationError("dt_max must be > 0");
    return ode;
}

void check_segments(const PiecewiseHamiltonian& h) {
    for (std::size_t i = 0; i < h.segments.size(); ++i) {
        const auto& s = h.segments[i];
        if (!(s.t1 >= s.t0)) throw ValidationError("segment with negative duration");
        if (i > 0 && std::abs(s.t0 - h.segments[i - 1].t1) > 1e-9)
            throw ValidationError("segments are not contiguous");
        if (s.set >= h.term_sets.size()) throw ValidationError("segment refers to a missing term set");
    }
}

Sample vector_sample(double t, const cplx* y, std::size_t n, const Observables* obs) {
    Sample s{t, 0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double p = std::norm(y[i]);
        s.norm += p;
        if (obs) {
            const auto k = static_cast<Eigen::Index>(i);
            s.q += p * obs->q(k);
            s.na += p * obs->na(k);
            s.nb += p * obs->nb(k);
        }
    }
    return s;
}

Sample density_sample(double t, const cplx* rho, std::size_t n, const Observables* obs) {
    Sample s{t, 0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double p = rho[i * n + i].real();
        s.norm += p;
        if (obs) {
            const auto k = static_cast<Eigen::Index>(i);
            s.q += p * obs->q(k);
            s.na += p * obs->na(k);
            s.nb += p * obs->nb(k);
        }
    }
    return s;
}

class Sampler {
public:
    Sampler(double every, std::vector<Sample>& out) : every_(every), out_(out) {}
    bool due(double t, bool force) const {
        if (every_ < 0.0) return false;
        return force || out_.empty() || every_ == 0.0 || t - out_.back().t >= every_;
    }
    void push(const Sample& s) { out_.push_back(s); }

private:
    double every_;
    std::vector<Sample>& out_;
};

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double uniform01(std::mt19937_64& rng) {
    // 53 random bits, open interval
    return (double(rng() >> 11) + 0.5) * 0x1p-53;
}

}  // namespace

// ---- closed system ------------------------------------------------------------------

PropagationResult propagate(const PiecewiseHamiltonian& h, const Vector& psi0, const EvolveOptions& opts,
                            const Observables* obs) {
    check_segments(h);
    if (!h.segments.empty() && static_cast<std::size_t>(psi0.size()) != h.dim)
        throw ValidationError("initial state dimension mismatch");
    const double n0 = psi0.squaredNorm();
    if (std::abs(n0 - 1.0) > 1e-10) throw ValidationError("initial state is not normalized");

    PropagationResult res;
    res.final = psi0;
    const std::size_t n = static_cast<std::size_t>(psi0.size());
    Sampler sampler(opts.sample_every, res.samples);
    if (sampler.due(h.t_begin(), true)) sampler.push(vector_sample(h.t_begin(), res.final.data(), n, obs));
    if (h.segments.empty()) return res;

    Generator gen(h, {});
    const auto& kt = kernels::active();
    Dopri5 ode(n, [&](double t, const cplx* y, cplx* dy) {
        gen.at(t);
        kt.csr_matvec(gen.k(), y, dy);
    }, ode_options(opts, kClosedRtol, kClosedAtol));

    double drift = 0.0;
    const auto hook = [&](double, const cplx*, double& t1, cplx* y1) {
        const double nn = kt.norm_sq(y1, n);
        drift = std::max(drift, std::abs(nn - n0));
        if (sampler.due(t1, false)) sampler.push(vector_sample(t1, y1, n, obs));
        return false;
    };
    double t = h.t_begin();
    for (std::size_t s = 0; s < h.segments.size(); ++s) {
        gen.select(s);
        t = h.segments[s].t0;
        ode.integrate(t, h.segments[s].t1, res.final.data(), hook);
        if (sampler.due(t, true) && (res.samples.empty() || res.samples.back().t != t))
            sampler.push(vector_sample(t, res.final.data(), n, obs));
    }
    res.max_norm_drift = drift;
    res.stats = ode.stats();
    return res;
}

// ---- Lindblad -----------------------------------------------------------------------

LindbladResult lindblad_evolve(const PiecewiseHamiltonian& h, std::span<const Matrix> collapse,
                               const Matrix& rho0, const EvolveOptions& opts, const Observables* obs) {
    check_segments(h);
    const std::size_t n = static_cast<std::size_t>(rho0.rows());
    if (rho0.cols() != rho0.rows()) throw ValidationError("density matrix must be square");
    if (!h.segments.empty() && n != h.dim) throw ValidationError("density matrix dimension mismatch");
    const double tr0 = rho0.trace().real();
    if (std::abs(tr0 - 1.0) > 1e-8) throw ValidationError("initial density matrix has trace != 1");
    if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("initial density matrix is not Hermitian");

    LindbladResult res;
    RowMatrix rho = rho0;
    Sampler sampler(opts.sample_every, res.samples);
    if (sampler.due(h.t_begin(), true)) sampler.push(density_sample(h.t_begin(), rho.data(), n, obs));
    res.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Matrix>(rho0, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (h.segments.empty()) {
        res.final = rho0;
        return res;
    }

    Generator gen(h, collapse);
    const auto& kt = kernels::active();
    const std::size_t n2 = n * n;
    std::vector<cplx> c(n2), y(n2), yt(n2), w(n2);
    Dopri5 ode(n2, [&](double t, const cplx* r, cplx* dr) {
        gen.at(t);
        kt.csr_matmat(gen.k(), r, n, c.data());
        for (std::size_t i = 0; i < n; ++i) {
            dr[i * n + i] = 2.0 * c[i * n + i].real();
            for (std::size_t j = i + 1; j < n; ++j) {
                const cplx v = c[i * n + j] + std::conj(c[j * n + i]);
                dr[i * n + j] = v;
                dr[j * n + i] = std::conj(v);
            }
        }
        for (const CsrMatrix& l : gen.jumps()) {
            kt.csr_matmat(l.view(), r, n, y.data());  // L rho
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) yt[j * n + i] = std::conj(y[i * n + j]);
            kt.csr_matmat(l.view(), yt.data(), n, w.data());  // L rho L^dag
            kt.axpy(cplx{1.0}, w.data(), dr, n2);
        }
    }, ode_options(opts, kLindbladRtol));

    double trace_drift = 0.0, herm = 0.0;
    const auto hook = [&](double, const cplx*, double& t1, cplx* r) {
        double tr = 0.0, hm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            tr += r[i * n + i].real();
            hm = std::max(hm, std::abs(r[i * n + i].imag()));
            for (std::size_t j = i + 1; j < n; ++j)
                hm = std::max(hm, std::abs(r[i * n + j] - std::conj(r[j * n + i])));
        }
        trace_drift = std::max(trace_drift, std::abs(tr - tr0));
        herm = std::max(herm, hm);
        if (sampler.due(t1, false)) sampler.push(density_sample(t1, r, n, obs));
        return false;
    };

    double t = h.t_begin();
    for (std::size_t s = 0; s < h.segments.size(); ++s) {
        gen.select(s);
        t = h.segments[s].t0;
        ode.integrate(t, h.segments[s].t1, rho.data(), hook);
        if (sampler.due(t, true) && (res.samples.empty() || res.samples.back().t != t))
            sampler.push(density_sample(t, rho.data(), n, obs));
        if (opts.check_positivity) {
            const Matrix herm_part = 0.5 * (Matrix(rho) + Matrix(rho).adjoint());
            const double lo =
                Eigen::SelfAdjointEigenSolver<Matrix>(herm_part, Eigen::EigenvaluesOnly).eigenvalues()(0);
            res.min_eigenvalue = std::min(res.min_eigenvalue, lo);
            if (lo < -1e-6) {
                std::ostringstream os;
                os << "density matrix lost positivity at t = " << t << " ns (segment " << s
                   << ", min eigenvalue " << lo << ", trace " << herm_part.trace().real()
                   << "); tighten rtol or reduce dt_max";
                throw NumericalError(os.str());
            }
        }
    }
    res.final = rho;
    res.max_trace_drift = trace_drift;
    res.max_hermiticity = herm;
    res.stats = ode.stats();
    return res;
}

// ---- trajectories -------------------------------------------------------------------

namespace {

struct TrajectoryOutcome {
    double fidelity = 0.0;
    std::size_t jumps = 0;
};

TrajectoryOutcome run_trajectory(const PiecewiseHamiltonian& h, Generator& gen, const Vector& psi0,
                                 const Vector& target, std::uint64_t seed, std::size_t index,
                                 const OdeOptions& ode_opt) {
    const std::size_t n = h.dim;
    const auto& kt = kernels::active();
    std::seed_seq sq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index),
                     std::uint32_t(std::uint64_t(index) >> 32)};
    std::mt19937_64 rng(sq);

    Vector psi = psi0;
    Dopri5 ode(n, [&](double t, const cplx* y, cplx* dy) {
        gen.at(t);
        kt.csr_matvec(gen.k(), y, dy);
    }, ode_opt);

    TrajectoryOutcome out;
    const auto& jumps = gen.jumps();
    std::vector<cplx> trial(n), jumped(n);
    std::vector<double> weights(jumps.size());
    double r = uniform01(rng);

    const auto hook = [&](double t0, const cplx* y0, double& t1, cplx* y1) {
        if (kt.norm_sq(y1, n) > r) return false;
        // bisect the crossing inside [t0, t1]
        double lo = 0.0, hi = t1 - t0;
        for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
            const double mid = 0.5 * (lo + hi);
            ode.trial_step(t0, y0, mid, trial.data());
            (kt.norm_sq(trial.data(), n) > r ? lo : hi) = mid;
        }
        if (hi < t1 - t0) ode.trial_step(t0, y0, hi, y1);
        t1 = t0 + hi;
        // pick the channel
        double total = 0.0;
        for (std::size_t k = 0; k < jumps.size(); ++k) {
            kt.csr_matvec(jumps[k].view(), y1, jumped.data());
            weights[k] = kt.norm_sq(jumped.data(), n);
            total += weights[k];
        }
        if (total <= 0.0) {  // nothing can jump; keep the no-jump branch
            r = uniform01(rng) * kt.norm_sq(y1, n);
            return true;
        }
        double pick = uniform01(rng) * total;
        std::size_t k = 0;
        while (k + 1 < jumps.size() && pick >= weights[k]) pick -= weights[k++];
        kt.csr_matvec(jumps[k].view(), y1, jumped.data());
        const double s = 1.0 / std::sqrt(weights[k]);
        for (std::size_t i = 0; i < n; ++i) y1[i] = jumped[i] * s;
        ++out.jumps;
        r = uniform01(rng);
        return true;
    };

    double t = h.t_begin();
    for (std::size_t s = 0; s < h.segments.size(); ++s) {
        gen.select(s);
        t = h.segments[s].t0;
        if (jumps.empty())
            ode.integrate(t, h.segments[s].t1, psi.data());
        else
            ode.integrate(t, h.segments[s].t1, psi.data(), hook);
    }
    const double nn = psi.squaredNorm();
    out.fidelity = std::norm(target.dot(psi)) / nn;  // Eigen dot conjugates the left operand
    return out;
}

}  // namespace

TrajectoryResult mcwf_sample(const PiecewiseHamiltonian& h, std::span<const Matrix> collapse,
                             const Vector& psi0, const Vector& target, std::size_t n_traj,
                             std::uint64_t seed, const EvolveOptions& opts) {
    check_segments(h);
    if (n_traj < 1) throw ValidationError("n_traj must be >= 1");
    if (static_cast<std::size_t>(psi0.size()) != h.dim || static_cast<std::size_t>(target.size()) != h.dim)
        throw ValidationError("trajectory state dimension mismatch");
    if (std::abs(psi0.squaredNorm() - 1.0) > 1e-10) throw ValidationError("initial state is not normalized");
    if (std::abs(target.squaredNorm() - 1.0) > 1e-8) throw ValidationError("target is not normalized");

    const OdeOptions ode_opt = collapse.empty() ? ode_options(opts, kClosedRtol, kClosedAtol) : ode_options(opts, kTrajectoryRtol);
    TrajectoryResult res;
    res.n_traj = n_traj;
    res.seed = seed;
    res.fidelities.assign(n_traj, 0.0);
    std::vector<std::size_t> jumps(n_traj, 0);

    unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_traj));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        try {
            Generator gen(h, collapse);
            for (std::size_t k = next++; k < n_traj; k = next++) {
                const auto o = run_trajectory(h, gen, psi0, target, seed, k, ode_opt);
                res.fidelities[k] = o.fidelity;
                jumps[k] = o.jumps;
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next = n_traj;
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    // Welford in index order: independent of the thread count, exact zero spread
    // when every trajectory agrees.
    double mean = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < n_traj; ++k) {
        const double x = res.fidelities[k];
        const double d = x - mean;
        mean += d / double(k + 1);
        m2 += d * (x - mean);
        res.jumps += jumps[k];
    }
    res.mean_fidelity = mean;
    res.std_error = n_traj > 1 ? std::sqrt(m2 / double(n_traj - 1)) / std::sqrt(double(n_traj)) : 0.0;
    return res;
}

// ---- windowing ----------------------------------------------------------------------

std::vector<Sample> windowed_expectations(const std::vector<Sample>& samples, double window) {
    if (window < 0.0) throw ValidationError("window must be >= 0");
    if (window == 0.0) return samples;
    if (samples.size() < 2) throw ValidationError("need at least two samples to window");
    const double t0 = samples.front().t, t1 = samples.back().t;
    if (window > t1 - t0)
        throw ValidationError("window larger than the sampled span");
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].t < samples[i - 1].t) throw ValidationError("samples are not time ordered");
        if (samples[i].t - samples[i - 1].t > 0.5 * window)
            throw ValidationError("samples too sparse for the window (need two per window)");
    }

    constexpr int kFields = 4;
    auto field = [](const Sample& s, int f) { return f == 0 ? s.q : f == 1 ? s.na : f == 2 ? s.nb : s.norm; };
    const std::size_t m = samples.size();
    std::vector<std::array<double, kFields>> cum(m);
    cum[0].fill(0.0);
    for (std::size_t i = 1; i < m; ++i)
        for (int f = 0; f < kFields; ++f)
            cum[i][f] = cum[i - 1][f] +
                        0.5 * (samples[i].t - samples[i - 1].t) * (field(samples[i], f) + field(samples[i - 1], f));

    // integral from t0 to x of the linear interpolant
    auto integral = [&](double x, int f) {
        auto it = std::upper_bound(samples.begin(), samples.end(), x,
                                   [](double v, const Sample& s) { return v < s.t; });
        std::size_t j = static_cast<std::size_t>(std::distance(samples.begin(), it));
        if (j == 0) return 0.0;
        if (j >= m) return cum[m - 1][f];
        --j;
        const double dt = samples[j + 1].t - samples[j].t;
        const double fa = field(samples[j], f);
        const double fx = dt > 0 ? fa + (field(samples[j + 1], f) - fa) * (x - samples[j].t) / dt : fa;
        return cum[j][f] + 0.5 * (x - samples[j].t) * (fa + fx);
    };

    std::vector<Sample> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double a = std::max(t0, samples[i].t - 0.5 * window);
        const double b = std::min(t1, samples[i].t + 0.5 * window);
        out[i].t = samples[i].t;
        double v[kFields];
        for (int f = 0; f < kFields; ++f) v[f] = (integral(b, f) - integral(a, f)) / (b - a);
        out[i].q = v[0];
        out[i].na = v[1];
        out[i].nb = v[2];
        out[i].norm = v[3];
    }
    return out;
}

}  // namespace fockprog

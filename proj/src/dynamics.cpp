#include "snls/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace snls {

namespace {

const cplx kI(0.0, 1.0);

double confining_slope(const ModelParams& P, double N) {
    // d/dN of c N^r, so that the gradient of c N^r is 2 * slope * phi
    if (P.kappa_coeff() == 0.0) return 0.0;
    return P.r * P.kappa_coeff() * std::pow(N, P.r - 1.0);
}

bool finite_field(const SpectralField& f) {
    for (const auto& c : f.data())
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

} // namespace

double NoiseSpec::trace_sq() const {
    double s = 0.0;
    for (double v : sigma) s += v * v;
    return s;
}

double NoiseSpec::max_sq() const {
    double m = 0.0;
    for (double v : sigma) m = std::max(m, v * v);
    return m;
}

NoiseSpec NoiseSpec::scaled(double a) const {
    NoiseSpec n = *this;
    for (auto& v : n.sigma) v *= a;
    return n;
}

bool noise_in_window(const ModelParams& P, double s) {
    return s > 7.0 / 16.0 && s < 0.5 && P.beta * P.m * P.m >= 1.0;
}

NoiseSpec make_noise(const ModelParams& P, double s, bool allow_outside_window) {
    P.validate();
    if (!std::isfinite(s) || s <= 0) throw ConfigError("noise.s", "must be positive");
    if (!allow_outside_window && !noise_in_window(P, s)) {
        if (!(s > 7.0 / 16.0 && s < 0.5))
            throw ConfigError("noise.s", "outside the window 7/16 < s < 1/2 (set noise.override to allow)");
        throw ConfigError("model.m", "beta m^2 < 1 breaks I <= sigma^2 C^{-1} (set noise.override to allow)");
    }
    NoiseSpec n;
    n.s = s;
    n.K = P.K;
    for (int k = -P.K; k <= P.K; ++k) n.sigma.push_back(std::pow(1.0 / (P.beta * P.omega(k)), s));
    return n;
}

void IntegratorCfg::validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("integrator.dt", "must be positive");
    if (n_steps < 0) throw ConfigError("integrator.n_steps", "must be non-negative");
    if (record_every < 1) throw ConfigError("integrator.record_every", "must be at least 1");
}

// ---------------------------------------------------------------- NLS

NlsStepper::NlsStepper(const ModelParams& P, double dt)
    : P_(P), dt_(dt), fft_(2 * P.K + 1), spec_(2 * P.K + 1), grid_(2 * P.K + 1) {
    for (int k = -P.K; k <= P.K; ++k) {
        long double q = P.wavenumber(k);
        half_.push_back(std::polar(1.0L, -q * q * dt * 0.5L));
    }
}

// The whole step runs in long double and rounds to double once. In double the
// linear phases (|e^{i theta}|^2 off by an ulp, reused every step) and the
// odd-length transform round trip bias N by ~1e-16 per step, linearly in time.
void NlsStepper::step(SpectralField& f) {
    const int K = P_.K, M = 2 * K + 1;
    for (int k = -K; k <= K; ++k) spec_[(k + M) % M] = cplxl(f[k].real(), f[k].imag()) * half_[k + K];
    if (P_.lambda != 0.0) {
        fft_.backward(spec_.data(), grid_.data());
        const long double g = P_.lambda * dt_;
        for (auto& v : grid_) {
            long double a2 = std::norm(v) / P_.L;
            long double e = P_.p == 4.0 ? a2 : std::pow(a2, 0.5L * P_.p - 1.0L);
            v *= std::polar(1.0L, g * e);
        }
        fft_.forward(grid_.data(), spec_.data());
        for (auto& z : spec_) z /= (long double)M;
    }
    for (int k = -K; k <= K; ++k) {
        cplxl z = spec_[(k + M) % M] * half_[k + K];
        f[k] = cplx(double(z.real()), double(z.imag()));
    }
}

SpectralField nls_step(const SpectralField& f, double dt, const ModelParams& P) {
    SpectralField g = f;
    NlsStepper(P, dt).step(g);
    return g;
}

// ---------------------------------------------------------------- GGC flow

GgcStepper::GgcStepper(const ModelParams& P, const NoiseSpec& noise, double dt, Scheme scheme)
    : P_(P), noise_(noise), dt_(dt), scheme_(scheme), coll_(P.K, P.L, 2 * P.K + 1),
      dealias_(P.K, P.L, P.dealias_grid()), k1_(P.K, P.L), k2_(P.K, P.L), tmp_(P.K, P.L) {
    if (noise.K != P.K) throw ConfigError("noise", "noise truncation does not match model K");
    double h = 0.5 * dt;
    for (int k = -P.K; k <= P.K; ++k) {
        double w = P.omega(k), s2 = noise.at(k) * noise.at(k);
        double a = 0.5 * P.beta * s2 * w;
        ou_decay_.push_back(std::exp(cplx(-a * h, -w * h)));
        ou_sd_.push_back(a > 0 ? std::sqrt(s2 * -std::expm1(-2.0 * a * h) / (2.0 * a)) : std::sqrt(s2 * h));
        damp_.push_back(0.5 * P.beta * s2);
    }
    if (scheme == Scheme::EulerMaruyama) {
        double wmax = P.omega(P.K);
        if (dt * wmax > 0.5)
            throw ConfigError("integrator.dt", "Euler-Maruyama needs dt * max omega_k <= 0.5");
    }
}

void GgcStepper::ou_half(SpectralField& f, Stream& rng) {
    auto& c = f.data();
    for (std::size_t i = 0; i < c.size(); ++i) {
        double re = rng.normal(), im = rng.normal();
        c[i] = ou_decay_[i] * c[i] + ou_sd_[i] * cplx(re, im);
    }
}

void GgcStepper::rotate(SpectralField& f, double h) {
    double N = l2_norm_sq(f);
    double conf = 2.0 * confining_slope(P_, N);
    if (P_.lambda != 0.0) {
        coll_.to_grid(f);
        for (auto& v : coll_.grid()) {
            double a = std::abs(v);
            double e = P_.p == 4.0 ? a * a : std::pow(a, P_.p - 2.0);
            v *= std::polar(1.0, P_.lambda * e * h);
        }
        coll_.from_grid(f);
    }
    if (conf != 0.0) f *= std::polar(1.0, -conf * h);
}

void GgcStepper::dissipative_rhs(const SpectralField& f, SpectralField& out) {
    double N = l2_norm_sq(f);
    double conf = 2.0 * confining_slope(P_, N);
    if (P_.lambda != 0.0) {
        dealias_.to_grid(f);
        for (auto& v : dealias_.grid()) {
            double a = std::abs(v);
            v *= P_.p == 4.0 ? a * a : std::pow(a, P_.p - 2.0);
        }
        dealias_.from_grid(out);
    } else {
        std::fill(out.data().begin(), out.data().end(), cplx(0.0));
    }
    // out <- -(beta/2) sigma^2 (-lambda |phi|^{p-2} phi + conf phi)
    for (int i = 0; i < f.size(); ++i)
        out.data()[i] = -damp_[i] * (-P_.lambda * out.data()[i] + conf * f.data()[i]);
}

void GgcStepper::dissipate(SpectralField& f, double h) {
    double N = l2_norm_sq(f);
    double amp = 0.0;
    for (const auto& c : f.data()) amp += std::abs(c);
    amp /= std::sqrt(P_.L);
    double rate = 0.5 * P_.beta * noise_.max_sq() *
                  (2.0 * confining_slope(P_, N) + std::abs(P_.lambda) * std::pow(amp, P_.p - 2.0));
    double nsub = std::ceil(rate * h / 0.1);
    if (!std::isfinite(nsub) || nsub > 1e6)
        throw NumericalError(FaultKind::BlowUp, "dissipative substep too stiff (rate " + std::to_string(rate) + ")");
    int n = std::max(1, int(nsub));
    double hs = h / n;
    for (int s = 0; s < n; ++s) {
        dissipative_rhs(f, k1_);
        for (int i = 0; i < f.size(); ++i) tmp_.data()[i] = f.data()[i] + hs * k1_.data()[i];
        dissipative_rhs(tmp_, k2_);
        for (int i = 0; i < f.size(); ++i) f.data()[i] += 0.5 * hs * (k1_.data()[i] + k2_.data()[i]);
    }
}

void GgcStepper::nonlinear_substep(SpectralField& f, double h) {
    if (P_.lambda == 0.0 && P_.kappa_coeff() == 0.0) return;
    rotate(f, 0.5 * h);
    dissipate(f, h);
    rotate(f, 0.5 * h);
}

void GgcStepper::em_step(SpectralField& f, Stream& rng) {
    SpectralField g = gradient_energy(f, P_, dealias_.M());
    double sq = std::sqrt(dt_);
    for (int k = -P_.K; k <= P_.K; ++k) {
        int i = k + P_.K;
        double re = rng.normal(), im = rng.normal();
        f[k] += (-kI * g[k] - damp_[i] * g[k]) * dt_ + noise_.at(k) * sq * cplx(re, im);
    }
}

void GgcStepper::step(SpectralField& f, Stream& rng) {
    if (scheme_ == Scheme::EulerMaruyama) {
        em_step(f, rng);
        return;
    }
    ou_half(f, rng);
    nonlinear_substep(f, dt_);
    ou_half(f, rng);
}

SpectralField ggc_sde_step(const SpectralField& f, double dt, Stream& rng, const ModelParams& P,
                           const NoiseSpec& noise) {
    SpectralField g = f;
    GgcStepper(P, noise, dt).step(g, rng);
    if (!finite_field(g)) throw BlowUp("non-finite state after one step", f, 0);
    return g;
}

// ---------------------------------------------------------------- canonical flow

double projected_noise_trace(const SpectralField& f, const NoiseSpec& noise) {
    double N = l2_norm_sq(f);
    double q = 0.0;
    for (int k = -f.K(); k <= f.K(); ++k) q += noise.at(k) * noise.at(k) * std::norm(f[k]);
    return noise.trace_sq_real() - q / N;
}

CanonicalStepper::CanonicalStepper(const ModelParams& P, const NoiseSpec& noise, double dt, double n)
    : CanonicalStepper(P, noise, dt, n, Options{}) {}

CanonicalStepper::CanonicalStepper(const ModelParams& P, const NoiseSpec& noise, double dt, double n,
                                   Options opt)
    : P_(P), noise_(noise), dt_(dt), n_(n), opt_(opt), dealias_(P.K, P.L, P.dealias_grid()) {
    if (!(n > 0)) throw ConfigError("canonical.n", "target N must be positive");
    for (int k = -P.K; k <= P.K; ++k) rot_.push_back(std::polar(1.0, -P.omega(k) * dt));
}

void CanonicalStepper::step(SpectralField& f, Stream& rng) {
    double N0 = l2_norm_sq(f);
    if (!(N0 > 0)) throw NumericalError(FaultKind::DegenerateState, "zero field has no tangent projection");
    // Exact flow of the linear part of J DE (a phase rotation per mode).
    for (int i = 0; i < f.size(); ++i) f.data()[i] *= rot_[i];

    const int K = P_.K;
    SpectralField nl(K, P_.L);
    if (P_.lambda != 0.0) {
        dealias_.to_grid(f);
        for (auto& v : dealias_.grid()) {
            double a = std::abs(v);
            v *= P_.p == 4.0 ? a * a : std::pow(a, P_.p - 2.0);
        }
        dealias_.from_grid(nl);
        nl *= cplx(-P_.lambda);
    }
    double conf = 2.0 * confining_slope(P_, N0);
    for (int k = -K; k <= K; ++k) nl[k] += conf * f[k];

    SpectralField grad = nl;
    for (int k = -K; k <= K; ++k) grad[k] += P_.omega(k) * f[k];

    auto project = [&](SpectralField& v) {
        double a = inner_re(f, v) / N0;
        for (int i = 0; i < v.size(); ++i) v.data()[i] -= a * f.data()[i];
    };

    SpectralField pg = grad;
    project(pg);
    for (int k = -K; k <= K; ++k) pg[k] *= noise_.at(k) * noise_.at(k);
    project(pg);

    SpectralField xi(K, P_.L);
    double sq = std::sqrt(dt_);
    for (int k = -K; k <= K; ++k) {
        double re = rng.normal(), im = rng.normal();
        xi[k] = noise_.at(k) * sq * cplx(re, im);
    }
    project(xi);

    last_trace_ = projected_noise_trace(f, noise_);
    double corr = opt_.correction ? opt_.correction_const * last_trace_ / N0 : 0.0;

    for (int k = -K; k <= K; ++k)
        f[k] += (-kI * nl[k] - 0.5 * P_.beta * pg[k] - corr * f[k]) * dt_ + xi[k];

    double N1 = l2_norm_sq(f);
    last_dN_ = N1 - N0;
    if (!std::isfinite(N1)) throw NumericalError(FaultKind::BlowUp, "non-finite state in canonical step");
    if (opt_.renormalize) {
        if (!(N1 > 0)) throw NumericalError(FaultKind::DegenerateState, "step collapsed the field to zero");
        f *= cplx(std::sqrt(n_ / N1));
    }
}

SpectralField canonical_sde_step(const SpectralField& f, double dt, Stream& rng, const ModelParams& P,
                                 const NoiseSpec& noise, double n) {
    SpectralField g = f;
    CanonicalStepper(P, noise, dt, n).step(g, rng);
    return g;
}

// ---------------------------------------------------------------- recording

std::vector<Observable> standard_observables(const ModelParams& P, double gamma) {
    int M = P.dealias_grid();
    return {
        {"N", [](const SpectralField& f) { return l2_norm_sq(f); }},
        {"H", [P, M](const SpectralField& f) { return hamiltonian(f, P, M); }},
        {"lp4", [M](const SpectralField& f) { return lp_norm_p(f, 4.0, M); }},
        {"sobolev", [gamma, P](const SpectralField& f) { return sobolev_norm_sq(f, gamma, P.m); }},
    };
}

Observable mode_energy_observable(int k) {
    return {"mode" + std::to_string(k), [k](const SpectralField& f) { return std::norm(f[k]); }};
}

Trajectory trajectory(const SpectralField& init, const StepFn& step, const IntegratorCfg& cfg,
                      const std::vector<Observable>& obs, Stream& rng) {
    cfg.validate();
    Trajectory tr;
    for (const auto& o : obs) tr.names.push_back(o.name);
    tr.values.resize(obs.size());
    SpectralField f = init, prev = init;
    auto record = [&](long n) {
        tr.t.push_back(double(n) * cfg.dt);
        for (std::size_t j = 0; j < obs.size(); ++j) tr.values[j].push_back(obs[j].fn(f));
    };
    record(0);
    for (long n = 1; n <= cfg.n_steps; ++n) {
        prev = f;
        try {
            step(f, rng);
        } catch (const BlowUp&) {
            throw;
        } catch (const NumericalError& e) {
            if (e.kind() == FaultKind::BlowUp) throw BlowUp(std::string(e.what()) + " at step " + std::to_string(n), prev, n);
            throw NumericalError(e.kind(), std::string(e.what()) + " at step " + std::to_string(n));
        }
        if (!finite_field(f)) throw BlowUp("non-finite state at step " + std::to_string(n), prev, n);
        if (n % cfg.record_every == 0) record(n);
    }
    tr.final_state = f;
    return tr;
}

} // namespace snls

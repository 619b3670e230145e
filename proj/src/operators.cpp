#include "snls/operators.hpp"

#include "snls/error.hpp"
#include "snls/measures.hpp"
#include "snls/parallel.hpp"
#include "snls/stats.hpp"

#include <algorithm>
#include <cmath>

namespace snls {

FreeOperatorSpec FreeOperatorSpec::from_params(const ModelParams& P, double s) {
    FreeOperatorSpec spec;
    spec.s = s;
    for (int k = -P.K; k <= P.K; ++k) spec.nu.push_back(1.0 / (P.beta * P.omega(k)));
    return spec;
}

std::vector<double> FreeOperatorSpec::rates() const {
    std::vector<double> r;
    for (double v : nu) r.push_back(std::pow(v, 2.0 * s - 1.0));
    return r;
}

double log_trace_free(double t, const FreeOperatorSpec& spec) {
    if (!(t > 0)) throw NumericalError(FaultKind::Domain, "trace needs t > 0");
    if (!(spec.s < 0.5))
        throw NumericalError(FaultKind::Domain, "divergence: s >= 1/2 gives rates that do not grow with |k|");
    double lg = 0.0;
    for (double rate : spec.rates()) lg -= 2.0 * std::log1p(-std::exp(-t * rate));
    return lg;
}

double trace_free(double t, const FreeOperatorSpec& spec) { return std::exp(log_trace_free(t, spec)); }

double cls_constant(const FreeOperatorSpec& spec) {
    if (!(spec.s < 0.5)) throw NumericalError(FaultKind::Domain, "log-Sobolev constant needs s < 1/2");
    double c = 0.0;
    for (double v : spec.nu) c = std::max(c, 2.0 * std::pow(v, 1.0 - 2.0 * spec.s));
    return c;
}

double potential_V(const SpectralField& f, const ModelParams& P) {
    double N = l2_norm_sq(f);
    double v = P.kappa_coeff() * std::pow(N, P.r);
    if (P.lambda != 0.0) v -= 0.25 * P.lambda * lp_norm_p(f, 4.0, P.dealias_grid());
    return v;
}

PotentialParts effective_potential_parts(const SpectralField& f, const ModelParams& P, const NoiseSpec& noise) {
    if (P.p != 4.0) throw NumericalError(FaultKind::Domain, "closed-form U is implemented for p = 4");
    const int K = f.K();
    const double N = l2_norm_sq(f);
    const double c = P.kappa_coeff(), r = P.r;
    const double tr = noise.trace_sq_real();

    SpectralField cubic(K, f.L());
    if (P.lambda != 0.0) cubic = nonlinear_term(f, 4.0, P.dealias_grid());

    double s2c = 0.0;   // <phi, sigma^2 C^{-1} phi>
    double s2 = 0.0;    // <phi, sigma^2 phi>
    double s2cq = 0.0;  // Re <sigma^2 C^{-1} phi, |phi|^2 phi>
    for (int k = -K; k <= K; ++k) {
        double sg = noise.at(k) * noise.at(k);
        double cinv = P.beta * P.omega(k);
        s2 += sg * std::norm(f[k]);
        s2c += sg * cinv * std::norm(f[k]);
        s2cq += sg * cinv * (std::conj(f[k]) * cubic[k]).real();
    }

    PotentialParts out;
    double h0v = 0.0;
    if (P.lambda != 0.0) h0v += P.lambda * (2.0 / f.L() * N * tr - s2cq);
    if (c != 0.0 && N > 0.0) {
        double a = 2.0 * c * r * std::pow(N, r - 1.0);
        h0v += a * (s2c - tr);
        if (r != 1.0) h0v -= 4.0 * c * r * (r - 1.0) * std::pow(N, r - 2.0) * s2;
    }
    out.h0v = h0v;

    double slope = (c != 0.0 && N > 0.0) ? 2.0 * c * r * std::pow(N, r - 1.0) : 0.0;
    double g = 0.0;
    for (int k = -K; k <= K; ++k) {
        cplx dv = -P.lambda * cubic[k] + slope * f[k];
        g += noise.at(k) * noise.at(k) * std::norm(dv);
    }
    out.grad_sq = g;
    out.U = 0.5 * P.beta * h0v + 0.25 * P.beta * P.beta * g;
    return out;
}

double effective_potential(const SpectralField& f, const ModelParams& P, const NoiseSpec& noise) {
    return effective_potential_parts(f, P, noise).U;
}

ExpIntegral mc_exp_integral(double tau, const ModelParams& P, const NoiseSpec& noise, int n_samples,
                            const Stream& rng, int workers) {
    if (n_samples < 4) throw ConfigError("integral.samples", "need at least four samples");
    ExpIntegral out;
    out.out_of_window = !noise_in_window(P, noise.s) || (P.lambda > 0 && !(P.r > 9.0));
    if (tau == 0.0) {
        out.estimate = 1.0;
        out.ess = n_samples;
        out.warning = out.out_of_window;
        return out;
    }
    constexpr int chunk = 1000;
    int nchunks = (n_samples + chunk - 1) / chunk;
    std::vector<double> w(n_samples);
    parallel_for(nchunks, workers, [&](int c) {
        Stream s = rng.split(std::uint64_t(c));
        for (int i = c * chunk; i < std::min(n_samples, (c + 1) * chunk); ++i)
            w[i] = -tau * effective_potential(sample_free(P, s), P, noise);
    });
    auto full = log_mean_exp(w);
    auto half = log_mean_exp(std::vector<double>(w.begin(), w.begin() + n_samples / 2));
    out.log_estimate = full.value;
    out.log_std_error = full.std_error;
    out.half_std_error = half.std_error;
    out.ess = full.ess;
    out.estimate = std::exp(full.value);
    out.std_error = out.estimate * full.std_error;
    out.warning = out.out_of_window || full.std_error > half.std_error;
    return out;
}

BoundEstimate golden_thompson_bound(double t, const FreeOperatorSpec& spec, const ModelParams& P,
                                    const NoiseSpec& noise, int n_samples, const Stream& rng, int workers) {
    double C = cls_constant(spec);
    auto I = mc_exp_integral(2.0 * C, P, noise, n_samples, rng, workers);
    BoundEstimate b;
    b.trace_free = trace_free(t, spec);
    b.integral = I.estimate;
    double lg = log_trace_free(t, spec) + t / C * I.log_estimate;
    b.bound = std::exp(lg);
    b.std_error = b.bound * t / C * I.log_std_error;
    b.warning = I.warning;
    return b;
}

} // namespace snls

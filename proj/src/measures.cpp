#include "snls/measures.hpp"

#include "snls/error.hpp"
#include "snls/parallel.hpp"
#include "snls/stats.hpp"
#include "snls/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace snls {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
} // namespace

double ModeLaw::min_theta() const { return *std::min_element(theta.begin(), theta.end()); }

double ModeLaw::mean_N() const {
    double s = 0.0;
    for (double t : theta) s += 2.0 / t;
    return s;
}

double ModeLaw::variance_N() const {
    double s = 0.0;
    for (double t : theta) s += 4.0 / (t * t);
    return s;
}

ModeLaw mode_law(const ModelParams& P) {
    P.validate();
    ModeLaw law;
    for (int k = -P.K; k <= P.K; ++k) {
        law.k.push_back(k);
        law.theta.push_back(P.beta * P.omega(k));
    }
    return law;
}

ModeLaw mode_law(std::vector<double> theta) {
    ModeLaw law;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(theta[i] > 0)) throw NumericalError(FaultKind::Domain, "mode precisions must be positive");
        law.k.push_back(int(i));
    }
    law.theta = std::move(theta);
    return law;
}

double mode_density(cplx x, double theta) {
    return theta / (2.0 * kPi) * std::exp(-0.5 * theta * std::norm(x));
}

double mode_sq_density(double s, double theta) {
    if (s < 0) return 0.0;
    return 0.5 * theta * std::exp(-0.5 * theta * s);
}

SpectralField sample_free(const ModelParams& P, Stream& rng) {
    SpectralField f(P.K, P.L);
    for (int k = -P.K; k <= P.K; ++k) {
        double sd = 1.0 / std::sqrt(P.beta * P.omega(k));
        double re = rng.normal(), im = rng.normal();
        f[k] = cplx(re * sd, im * sd);
    }
    return f;
}

cplx char_product(double xi, double eps, double gamma, const ModeLaw& law) {
    if (!(gamma < 0.5)) throw NumericalError(FaultKind::Domain, "gamma must be below 1/2");
    if (2.0 * eps > std::pow(law.min_theta(), 1.0 - gamma))
        throw NumericalError(FaultKind::Domain, "eps exceeds (beta m^2)^{1-gamma} / 2");
    // Accumulate the log to avoid underflow for many modes.
    cplx lg = 0.0;
    for (double t : law.theta) lg -= std::log(cplx(1.0 - 2.0 * eps / std::pow(t, 1.0 - gamma), -2.0 * xi / t));
    return std::exp(lg);
}

NDensity::NDensity(const ModeLaw& law) : NDensity(law, Options{}) {}

NDensity::NDensity(const ModeLaw& law, Options opt) : law_(law), opt_(opt) {
    double scale = 2.0 / law_.min_theta();
    n_max_ = law_.mean_N() + 12.0 * std::sqrt(law_.variance_N()) + 45.0 * scale;
    h_ = kPi / n_max_;
    delta_ = opt_.smoothing * scale;
    double xi_max = 9.0 / delta_;
    build(h_, xi_max, F_);

    std::vector<cplx> F2;
    build(0.5 * h_, 1.25 * xi_max, F2);
    double mu = law_.mean_N(), sd = std::sqrt(law_.variance_N());
    double peak = 0.0;
    for (double n : {0.5 * mu, mu - 0.5 * sd, mu, mu + sd, mu + 3.0 * sd}) {
        if (n <= 0) continue;
        double a = eval(F_, h_, n), b = eval(F2, 0.5 * h_, n);
        peak = std::max(peak, std::abs(a));
        residual_ = std::max(residual_, std::abs(a - b));
    }
    if (residual_ > opt_.tolerance * std::max(1.0, peak))
        throw NumericalError(FaultKind::Tolerance,
                             "density inversion residual " + std::to_string(residual_) + " above tolerance");
}

void NDensity::build(double h, double xi_max, std::vector<cplx>& F) const {
    auto J = std::size_t(std::ceil(xi_max / h));
    F.assign(J + 1, cplx(0.0));
    for (std::size_t j = 0; j <= J; ++j) {
        double xi = double(j) * h;
        double g = std::exp(-0.5 * xi * xi * delta_ * delta_);
        F[j] = char_product(xi, 0.0, 0.0, law_) * g;
    }
}

double NDensity::eval(const std::vector<cplx>& F, double h, double n) const {
    cplx step = std::polar(1.0, -h * n);
    cplx rot = 1.0;
    double s = 0.5 * F[0].real();
    for (std::size_t j = 1; j < F.size(); ++j) {
        if ((j & 1023) == 0) rot = std::polar(1.0, -h * n * double(j));
        else rot *= step;
        s += (F[j] * rot).real();
    }
    return h / kPi * s;
}

double NDensity::operator()(double n) const { return n < 0 ? 0.0 : eval(F_, h_, n); }

double NDensity::smoothed(double n) const { return eval(F_, h_, n); }

double NDensity::integrate(const std::function<double(double)>& g) const {
    if (table_.empty()) {
        // Four points per period of the highest retained frequency.
        auto M = next_power_of_two(long(4 * F_.size()));
        std::vector<cplx> in(M, cplx(0.0)), out(M);
        for (std::size_t j = 0; j < F_.size(); ++j) in[j] = F_[j];
        in[0] *= 0.5;
        Fft(int(M)).forward(in.data(), out.data());
        table_dn_ = 2.0 * kPi / (double(M) * h_);
        table_.resize(M);
        for (long q = 0; q < M; ++q) table_[q] = h_ / kPi * out[q].real();
    }
    long M = long(table_.size());
    double s = 0.0;
    for (long q = 0; q < M; ++q) {
        // Indices past M/2 are negative n.
        double n = double(q < M / 2 ? q : q - M) * table_dn_;
        s += table_[q] * g(n);
    }
    return s * table_dn_;
}

double density_of_N(double n, const ModeLaw& law) { return NDensity(law)(n); }

double fejer_kernel(double t, int ell) {
    if (std::abs(t) > kPi) return 0.0;
    double s = std::sin(0.5 * t);
    if (std::abs(s) < 1e-12) return double(ell);
    double q = std::sin(0.5 * ell * t) / s;
    return q * q / ell;
}

double log_fejer_kernel(double t, int ell) {
    double v = fejer_kernel(t, ell);
    return v > 0 ? std::log(v) : kNegInf;
}

ChainResult run_reference_chain(const ModelParams& P, const LogWeight& logw, const ChainConfig& cfg,
                                int n_samples, Stream& rng, const SpectralField* init) {
    if (cfg.thin < 1) throw ConfigError("chain.thin", "must be at least 1");
    if (cfg.burn_in < 0) throw ConfigError("chain.burn_in", "must be non-negative");
    bool indep = cfg.proposal == Proposal::Independence;
    double rho = indep ? 1.0 : std::clamp(cfg.rho, 1e-4, 1.0);

    SpectralField cur = init ? *init : sample_free(P, rng);
    double wc = logw(cur);
    SpectralField prop(P.K, P.L);

    long accepted = 0, proposed = 0, win_acc = 0, win_n = 0;
    auto step = [&](bool adapting) {
        SpectralField xi = sample_free(P, rng);
        double a = std::sqrt(1.0 - rho * rho);
        for (int i = 0; i < prop.size(); ++i) prop.data()[i] = a * cur.data()[i] + rho * xi.data()[i];
        double wp = logw(prop);
        bool ok;
        if (wc == kNegInf) ok = true;
        else if (wp == kNegInf) ok = false;
        else ok = std::log(rng.uniform_pos()) < wp - wc;
        if (ok) {
            std::swap(cur, prop);
            wc = wp;
        }
        if (adapting) {
            win_acc += ok;
            if (++win_n == 100) {
                double rate = double(win_acc) / 100.0;
                rho = std::clamp(rho * std::exp(2.0 * (rate - cfg.target_accept)), 1e-4, 1.0);
                win_acc = win_n = 0;
            }
        } else {
            accepted += ok;
            ++proposed;
        }
    };

    for (int i = 0; i < cfg.burn_in; ++i) step(cfg.adapt && !indep);

    ChainResult out;
    out.samples.reserve(n_samples);
    for (int s = 0; s < n_samples; ++s) {
        for (int t = 0; t < cfg.thin; ++t) step(false);
        out.samples.push_back(cur);
        out.trace_N.push_back(l2_norm_sq(cur));
    }
    out.acceptance = proposed ? double(accepted) / double(proposed) : 0.0;
    out.rho = rho;
    if (proposed > 0 && out.acceptance < cfg.min_accept)
        throw NumericalError(FaultKind::StuckChain, "acceptance " + std::to_string(out.acceptance) +
                                                        " after burn-in (rho = " + std::to_string(rho) + ")");
    return out;
}

ChainResult sample_conditioned(double n, int ell, const ModelParams& P, const ChainConfig& cfg, int n_samples,
                               Stream& rng) {
    if (ell < 1) throw ConfigError("chain.ell", "must be a positive integer");
    auto logw = [n, ell](const SpectralField& f) { return log_fejer_kernel(n - l2_norm_sq(f), ell); };
    return run_reference_chain(P, logw, cfg, n_samples, rng);
}

double ggc_log_weight(const SpectralField& f, const ModelParams& P, int M) {
    double N = l2_norm_sq(f);
    double w = -P.beta * P.kappa_coeff() * std::pow(N, P.r);
    if (P.lambda != 0.0) w += P.beta * P.lambda / P.p * lp_norm_p(f, P.p, M);
    return w;
}

namespace {

LogWeight ggc_weight_fn(const ModelParams& P) {
    auto ops = std::make_shared<GridOps>(P.K, P.L, P.dealias_grid());
    return [ops, P](const SpectralField& f) {
        double N = l2_norm_sq(f);
        double w = -P.beta * P.kappa_coeff() * std::pow(N, P.r);
        if (P.lambda != 0.0) {
            ops->to_grid(f);
            w += P.beta * P.lambda / P.p * ops->lp_from_grid(P.p);
        }
        return w;
    };
}

} // namespace

ChainResult sample_ggc(const ModelParams& P, const ChainConfig& cfg, int n_samples, Stream& rng,
                       const SpectralField* init) {
    P.validate();
    if (P.lambda > 0 && !(P.kappa > 0)) throw ConfigError("model.kappa", "kappa > 0 required when lambda > 0");
    if (P.lambda > 0 && !(P.p < 6.0)) throw ConfigError("model.p", "p < 6 required when lambda > 0");
    return run_reference_chain(P, ggc_weight_fn(P), cfg, n_samples, rng, init);
}

std::vector<SpectralField> sample_ggc_pool(const ModelParams& P, const ChainConfig& cfg, int n_samples,
                                           int chains, const Stream& rng, int workers) {
    chains = std::max(1, std::min(chains, n_samples));
    std::vector<std::vector<SpectralField>> parts(chains);
    parallel_for(chains, workers, [&](int c) {
        int n = n_samples / chains + (c < n_samples % chains ? 1 : 0);
        Stream s = rng.split(std::uint64_t(c));
        parts[c] = sample_ggc(P, cfg, n, s).samples;
    });
    std::vector<SpectralField> out;
    out.reserve(n_samples);
    for (auto& p : parts)
        for (auto& f : p) out.push_back(std::move(f));
    return out;
}

PartitionEstimate estimate_log_partition(const ModelParams& P, int n_samples, const Stream& rng, int workers) {
    P.validate();
    if (n_samples < 2) throw ConfigError("partition.samples", "need at least two samples");
    constexpr int chunk = 1000;
    int nchunks = (n_samples + chunk - 1) / chunk;
    std::vector<double> w(n_samples);
    parallel_for(nchunks, workers, [&](int c) {
        Stream s = rng.split(std::uint64_t(c));
        auto logw = ggc_weight_fn(P);
        for (int i = c * chunk; i < std::min(n_samples, (c + 1) * chunk); ++i) w[i] = logw(sample_free(P, s));
    });
    auto lme = log_mean_exp(w);
    PartitionEstimate e;
    e.log_z = lme.value;
    e.std_error = lme.std_error;
    e.ess = lme.ess;
    e.unreliable = lme.ess < 100.0;
    e.n_samples = n_samples;
    return e;
}

double log_partition_quadrature(const ModelParams& P) {
    if (P.lambda != 0.0) throw NumericalError(FaultKind::Domain, "quadrature route requires lambda = 0");
    NDensity rho(mode_law(P));
    double c = P.beta * P.kappa_coeff();
    // The damped density is smooth, so the trapezoid rule on its FFT table is
    // spectrally accurate; the part smeared below 0 is kept.
    return std::log(rho.integrate([&](double x) {
        return std::exp(-c * std::pow(std::max(x, 0.0), P.r));
    }));
}

SweepResult sweep_partition(const ModelParams& P, const std::vector<double>& lambdas,
                            const std::vector<double>& kappas, int n_samples, const Stream& rng, int workers) {
    SweepResult out;
    out.lambdas = lambdas;
    out.kappas = kappas;
    std::size_t nl = lambdas.size(), nk = kappas.size();
    out.grid.assign(nl, std::vector<PartitionEstimate>(nk));
    for (std::size_t i = 0; i < nl; ++i)
        for (std::size_t j = 0; j < nk; ++j) {
            ModelParams Q = P;
            Q.lambda = lambdas[i];
            Q.kappa = kappas[j];
            out.grid[i][j] = estimate_log_partition(Q, n_samples, rng.split(i * nk + j), workers);
        }
    auto ratio = [](const PartitionEstimate& a, const PartitionEstimate& b, const PartitionEstimate& c) {
        double d = a.log_z - 2.0 * b.log_z + c.log_z;
        double e = std::sqrt(a.std_error * a.std_error + 4.0 * b.std_error * b.std_error + c.std_error * c.std_error);
        return e > 0 ? std::abs(d) / e : (d == 0 ? 0.0 : std::numeric_limits<double>::infinity());
    };
    for (std::size_t i = 0; i < nl; ++i)
        for (std::size_t j = 0; j < nk; ++j) {
            if (i > 0 && i + 1 < nl)
                out.max_curvature_ratio =
                    std::max(out.max_curvature_ratio, ratio(out.grid[i - 1][j], out.grid[i][j], out.grid[i + 1][j]));
            if (j > 0 && j + 1 < nk)
                out.max_curvature_ratio =
                    std::max(out.max_curvature_ratio, ratio(out.grid[i][j - 1], out.grid[i][j], out.grid[i][j + 1]));
        }
    return out;
}

} // namespace snls

#pragma once

#include "snls/field.hpp"
#include "snls/rng.hpp"

#include <functional>
#include <vector>

namespace snls {

// Precisions theta_k of the truncated Gaussian reference measure. Real and
// imaginary parts of mode k are independent N(0, 1/theta_k).
struct ModeLaw {
    std::vector<int> k;
    std::vector<double> theta;

    double min_theta() const;
    double mean_N() const;     // sum 2 / theta_k
    double variance_N() const; // sum 4 / theta_k^2
};

ModeLaw mode_law(const ModelParams& P);
ModeLaw mode_law(std::vector<double> theta);

// Density of one complex mode coefficient on C = R^2.
double mode_density(cplx x, double theta);
// Density of |X_k|^2, an exponential law with mean 2/theta.
double mode_sq_density(double s, double theta);

SpectralField sample_free(const ModelParams& P, Stream& rng);

// prod_k (1 - 2 i xi / theta_k - 2 eps / theta_k^{1-gamma})^{-1}
cplx char_product(double xi, double eps, double gamma, const ModeLaw& law);

// Density of N = sum |X_k|^2 by damped Fourier inversion of char_product(xi, 0).
class NDensity {
public:
    struct Options {
        double smoothing = 1e-3; // Gaussian damping width relative to 2/theta_min
        double tolerance = 1e-6; // allowed change under grid refinement
    };

    explicit NDensity(const ModeLaw& law);
    NDensity(const ModeLaw& law, Options opt);

    double operator()(double n) const;
    // Damped inversion without clipping at n < 0.
    double smoothed(double n) const;
    // int smoothed(n) g(n) dn by the trapezoid rule on an FFT table of the
    // smoothed density over [-support_max, support_max).
    double integrate(const std::function<double(double)>& g) const;
    double support_max() const { return n_max_; }
    // Width of the Gaussian damping; the inverted density leaks this far below 0.
    double smoothing_width() const { return delta_; }
    double residual() const { return residual_; }

private:
    void build(double h, double xi_max, std::vector<cplx>& F) const;
    double eval(const std::vector<cplx>& F, double h, double n) const;

    ModeLaw law_;
    Options opt_;
    double n_max_ = 0.0, h_ = 0.0, delta_ = 0.0;
    std::vector<cplx> F_;
    double residual_ = 0.0;
    mutable std::vector<double> table_; // built on first use
    mutable double table_dn_ = 0.0;
};

double density_of_N(double n, const ModeLaw& law);

// (1/l) (1 - cos l t) / (1 - cos t) on [-pi, pi], zero outside.
double fejer_kernel(double t, int ell);
double log_fejer_kernel(double t, int ell);

enum class Proposal { PCN, Independence };

struct ChainConfig {
    int burn_in = 2000;
    int thin = 50;
    double rho = 0.3; // pCN step; tuned during burn-in when adapt is set
    bool adapt = true;
    double target_accept = 0.25;
    Proposal proposal = Proposal::PCN;
    double min_accept = 1e-3; // below this after burn-in the chain is declared stuck
};

struct ChainResult {
    std::vector<SpectralField> samples;
    std::vector<double> trace_N; // N at every retained sample
    double acceptance = 0.0;     // post burn-in
    double rho = 0.0;            // final proposal step
};

// Metropolis chain targeting exp(logw) d mu_beta with pCN or independence proposals.
using LogWeight = std::function<double(const SpectralField&)>;
ChainResult run_reference_chain(const ModelParams& P, const LogWeight& logw, const ChainConfig& cfg,
                                int n_samples, Stream& rng, const SpectralField* init = nullptr);

// nu_{n,beta,l}: density proportional to K_l(n - N) with respect to mu_beta.
ChainResult sample_conditioned(double n, int ell, const ModelParams& P, const ChainConfig& cfg,
                               int n_samples, Stream& rng);

// beta (lambda/p) ||phi||_p^p - beta c N^r with c the confining coefficient.
double ggc_log_weight(const SpectralField& f, const ModelParams& P, int M = 0);

ChainResult sample_ggc(const ModelParams& P, const ChainConfig& cfg, int n_samples, Stream& rng,
                       const SpectralField* init = nullptr);

// n_samples draws from sample_ggc split over `chains` independent chains.
std::vector<SpectralField> sample_ggc_pool(const ModelParams& P, const ChainConfig& cfg, int n_samples,
                                           int chains, const Stream& rng, int workers = 1);

struct PartitionEstimate {
    double log_z = 0.0;
    double std_error = 0.0;
    double ess = 0.0;
    bool unreliable = false; // ESS below 100
    int n_samples = 0;
};

// log E_{mu_beta}[exp(ggc_log_weight)] by importance sampling from mu_beta.
PartitionEstimate estimate_log_partition(const ModelParams& P, int n_samples, const Stream& rng,
                                         int workers = 1);

// log int rho_N(n) exp(-beta c n^r) dn for lambda = 0.
double log_partition_quadrature(const ModelParams& P);

struct SweepResult {
    std::vector<double> lambdas, kappas;
    // indexed [i_lambda][i_kappa]
    std::vector<std::vector<PartitionEstimate>> grid;
    // max over interior points and both axes of |second difference| / its std.err
    double max_curvature_ratio = 0.0;
};

SweepResult sweep_partition(const ModelParams& P, const std::vector<double>& lambdas,
                            const std::vector<double>& kappas, int n_samples, const Stream& rng,
                            int workers = 1);

} // namespace snls

#pragma once

#include "snls/dynamics.hpp"
#include "snls/field.hpp"
#include "snls/rng.hpp"

#include <vector>

namespace snls {

// Free operator H0 = sum_j nu_j^{2s} (-D_j^2 + x_j / nu_j D_j) over real
// coordinates. Each complex mode contributes two real coordinates with the
// same covariance nu_k.
struct FreeOperatorSpec {
    std::vector<double> nu; // one entry per complex mode
    double s = 0.47;

    static FreeOperatorSpec from_params(const ModelParams& P, double s);
    // number-operator rate nu^{2s-1} of each complex mode
    std::vector<double> rates() const;
};

// prod over real coordinates of 1 / (1 - exp(-t rate)).
double trace_free(double t, const FreeOperatorSpec& spec);
double log_trace_free(double t, const FreeOperatorSpec& spec);
// max_k 2 nu_k^{1-2s}
double cls_constant(const FreeOperatorSpec& spec);

// Potential V = -(lambda/4) ||phi||_4^4 + c N^r (c the confining coefficient).
double potential_V(const SpectralField& f, const ModelParams& P);

struct PotentialParts {
    double h0v = 0.0;     // (H0 V)(phi)
    double grad_sq = 0.0; // ||sigma DV||^2
    double U = 0.0;       // (beta/2) h0v + (beta^2/4) grad_sq
};
// Closed form; requires p = 4.
PotentialParts effective_potential_parts(const SpectralField& f, const ModelParams& P, const NoiseSpec& noise);
double effective_potential(const SpectralField& f, const ModelParams& P, const NoiseSpec& noise);

struct ExpIntegral {
    double estimate = 0.0;     // int exp(-tau U) d mu_beta
    double std_error = 0.0;
    double log_estimate = 0.0;
    double log_std_error = 0.0;
    double half_std_error = 0.0; // log-scale error from the first half of the samples
    double ess = 0.0;
    bool out_of_window = false;
    bool warning = false; // error did not shrink with n, or noise outside the window
};

ExpIntegral mc_exp_integral(double tau, const ModelParams& P, const NoiseSpec& noise, int n_samples,
                            const Stream& rng, int workers = 1);

struct BoundEstimate {
    double bound = 0.0;
    double std_error = 0.0;
    double trace_free = 0.0;
    double integral = 0.0;
    bool warning = false;
};

// Tr e^{-t H0} * (int e^{-2 C_LS U} d mu_beta)^{t / C_LS}
BoundEstimate golden_thompson_bound(double t, const FreeOperatorSpec& spec, const ModelParams& P,
                                    const NoiseSpec& noise, int n_samples, const Stream& rng, int workers = 1);

} // namespace snls

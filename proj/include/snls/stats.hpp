#pragma once

#include <cstddef>
#include <vector>

namespace snls {

double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x); // unbiased
double std_error(const std::vector<double>& x);
// Standard error of the mean from nb contiguous batches (for correlated series).
double batch_std_error(const std::vector<double>& x, int nb = 50);
// Integrated autocorrelation time with Sokal's automatic window (c = 5).
double integrated_autocorr_time(const std::vector<double>& x);

struct LogMeanExp {
    double value = 0.0;     // log mean exp(w)
    double std_error = 0.0; // delete-one jackknife
    double ess = 0.0;       // (sum e^w)^2 / sum e^{2w}
};
LogMeanExp log_mean_exp(const std::vector<double>& w);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double n_eff = 0.0;
};
// Two-sample Kolmogorov-Smirnov with the asymptotic Kolmogorov law
// (Stephens' small-sample correction).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
// P(K > x) for the Kolmogorov distribution.
double kolmogorov_survival(double x);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
};
// Weighted least squares y ~ a + b x; empty weights means unit weights.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& w = {});

double quantile(std::vector<double> x, double q);

} // namespace snls

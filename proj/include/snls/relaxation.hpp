#pragma once

#include "snls/dynamics.hpp"
#include "snls/stats.hpp"

#include <functional>
#include <string>
#include <vector>

namespace snls {

struct EnsembleStats {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> mean;      // [observable][time]
    std::vector<std::vector<double>> std_error; // [observable][time]
    // Per-trajectory series [observable][trajectory][time], kept for resampling.
    std::vector<std::vector<std::vector<double>>> series;
    std::vector<SpectralField> final_states;
    int M = 0;
    std::string init_descr;

    int index(const std::string& name) const;
};

using InitSampler = std::function<SpectralField(Stream&, int)>;

// M >= 100 trajectories; trajectory i draws its initial state and its noise
// from rng.split(i), so the result does not depend on `workers`.
EnsembleStats run_ensemble(const InitSampler& init, const StepperFactory& stepper, const IntegratorCfg& cfg,
                           const std::vector<Observable>& obs, int M, const Stream& rng, int workers = 1,
                           const std::string& init_descr = "");

// Rebuilds means and errors from `series`.
void summarize(EnsembleStats& st);

struct RateFit {
    double rate = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0; // 95% bootstrap interval
    double r_squared = 0.0;
    double t_min = 0.0, t_max = 0.0;
    int points = 0;
};

struct FitOptions {
    // Window opens once |signal| has fallen to this fraction of its largest value.
    double start_fraction = 1.0;
    // ...and never before this time, so fast transients can be skipped.
    double t_start = 0.0;
    // Window closes when |signal| drops below noise_factor * std.err.
    double noise_factor = 3.0;
    double eq_std_error = 0.0;
    int bootstrap = 400;
    int min_points = 5;
    std::uint64_t seed = 12345;
};

// Weighted least squares of log|mean(t) - eq| against t on the signal window.
RateFit fit_rate(const EnsembleStats& st, const std::string& observable, double equilibrium, FitOptions opt = {});

struct EquilibriumTest {
    double statistic = 0.0;
    double p_value = 1.0;
    bool power_warning = false; // fewer than 50 samples on a side
};

EquilibriumTest equilibrium_test(const std::vector<double>& a, const std::vector<double>& b);

} // namespace snls

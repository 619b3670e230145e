#pragma once

#include "snls/error.hpp"
#include "snls/field.hpp"
#include "snls/rng.hpp"
#include "snls/transform.hpp"

#include <functional>
#include <string>
#include <vector>

namespace snls {

// Noise covariance sigma = C^s, diagonal with sigma_k = nu_k^s, nu_k = 1/theta_k.
struct NoiseSpec {
    double s = 0.47;
    int K = 0;
    std::vector<double> sigma; // index k + K

    double at(int k) const { return sigma[k + K]; }
    // sum_k sigma_k^2 over complex modes
    double trace_sq() const;
    // trace of sigma^2 over the real coordinates, 2 * trace_sq()
    double trace_sq_real() const { return 2.0 * trace_sq(); }
    double max_sq() const;
    NoiseSpec scaled(double a) const;
};

// Window 7/16 < s < 1/2 and beta m^2 >= 1 (so that I <= sigma^2 C^{-1}) unless overridden.
NoiseSpec make_noise(const ModelParams& P, double s, bool allow_outside_window = false);
bool noise_in_window(const ModelParams& P, double s);

enum class Scheme { StrangOU, EulerMaruyama };

struct IntegratorCfg {
    double dt = 1e-3;
    Scheme scheme = Scheme::StrangOU;
    long n_steps = 1000;
    int record_every = 10;

    void validate() const;
};

class BlowUp : public NumericalError {
public:
    BlowUp(const std::string& what, SpectralField last_good, long step)
        : NumericalError(FaultKind::BlowUp, what), last_good_(std::move(last_good)), step_(step) {}
    const SpectralField& last_good() const { return last_good_; }
    long step() const { return step_; }

private:
    SpectralField last_good_;
    long step_;
};

// Strang split-step for i dphi/dt = -Laplacian phi - lambda |phi|^{p-2} phi. The
// nonlinear substep acts on the 2K+1 point collocation grid, which is a
// bijection with the retained modes, so N is conserved to roundoff.
class NlsStepper {
public:
    NlsStepper(const ModelParams& P, double dt);
    void step(SpectralField& f);

private:
    ModelParams P_;
    double dt_;
    FftLong fft_;
    std::vector<cplxl> half_, spec_, grid_;
};

SpectralField nls_step(const SpectralField& f, double dt, const ModelParams& P);

// Stochastic flow dphi = [J DE - (beta/2) sigma^2 DE] dt + sigma dW with E the
// effective energy; J is multiplication by -i.
class GgcStepper {
public:
    GgcStepper(const ModelParams& P, const NoiseSpec& noise, double dt, Scheme scheme = Scheme::StrangOU);
    void step(SpectralField& f, Stream& rng);

    // Nonlinear drift substep alone (deterministic), exposed for tests.
    void nonlinear_substep(SpectralField& f, double h);

private:
    void ou_half(SpectralField& f, Stream& rng);
    void rotate(SpectralField& f, double h);
    void dissipate(SpectralField& f, double h);
    void dissipative_rhs(const SpectralField& f, SpectralField& out);
    void em_step(SpectralField& f, Stream& rng);

    ModelParams P_;
    NoiseSpec noise_;
    double dt_;
    Scheme scheme_;
    GridOps coll_, dealias_;
    std::vector<cplx> ou_decay_;
    std::vector<double> ou_sd_, damp_;
    SpectralField k1_, k2_, tmp_;
};

SpectralField ggc_sde_step(const SpectralField& f, double dt, Stream& rng, const ModelParams& P,
                           const NoiseSpec& noise);

// Euler-Maruyama for the sphere-projected flow followed by renormalization to N = n.
class CanonicalStepper {
public:
    struct Options {
        bool correction = true;
        double correction_const = 0.5; // c in -c Tr(sigma^2 P) phi / N
        bool renormalize = true;
    };
    CanonicalStepper(const ModelParams& P, const NoiseSpec& noise, double dt, double n, Options opt);
    CanonicalStepper(const ModelParams& P, const NoiseSpec& noise, double dt, double n);
    void step(SpectralField& f, Stream& rng);

    // Diagnostics of the last step, before renormalization.
    double last_dN() const { return last_dN_; }
    double last_trace() const { return last_trace_; }

private:
    ModelParams P_;
    NoiseSpec noise_;
    double dt_, n_;
    Options opt_;
    GridOps dealias_;
    std::vector<cplx> rot_;
    double last_dN_ = 0.0, last_trace_ = 0.0;
};

SpectralField canonical_sde_step(const SpectralField& f, double dt, Stream& rng, const ModelParams& P,
                                 const NoiseSpec& noise, double n);

// Tr over real coordinates of sigma^2 P_phi.
double projected_noise_trace(const SpectralField& f, const NoiseSpec& noise);

using StepFn = std::function<void(SpectralField&, Stream&)>;
using StepperFactory = std::function<StepFn()>;

struct Observable {
    std::string name;
    std::function<double(const SpectralField&)> fn;
};

// N, H, lp4 (int |phi|^4), sobolev (gamma-norm squared).
std::vector<Observable> standard_observables(const ModelParams& P, double gamma = 0.1);
Observable mode_energy_observable(int k);

struct Trajectory {
    std::vector<double> t;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values; // [observable][record]
    SpectralField final_state;
};

Trajectory trajectory(const SpectralField& init, const StepFn& step, const IntegratorCfg& cfg,
                      const std::vector<Observable>& obs, Stream& rng);

} // namespace snls

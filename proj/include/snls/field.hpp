#pragma once

#include "snls/transform.hpp"

#include <complex>
#include <numbers>
#include <vector>

namespace snls {

// How the confining term enters the energy: kappa * N^r, (kappa/r) * N^r or
// (kappa/2r) * N^r.
enum class KappaForm { Power, OverR, Over2R };

struct ModelParams {
    int K = 128;
    double L = 2.0 * std::numbers::pi;
    double m = 1.0;
    double beta = 1.0;
    double lambda = 0.1;
    double p = 4.0;
    double kappa = 1.0;
    double r = 10.0;
    KappaForm kappa_form = KappaForm::Power;

    // Coefficient c in the confining term c * N^r.
    double kappa_coeff() const;
    // omega_k = (2 pi k / L)^2 + m^2
    double omega(int k) const;
    double wavenumber(int k) const { return 2.0 * std::numbers::pi * k / L; }
    int modes() const { return 2 * K + 1; }
    // Power-of-two collocation size with padding max(2, ceil(p/2)) over 2K+1.
    int dealias_grid() const;
    // Throws ConfigError on an invalid combination.
    void validate() const;
};

// Coefficients c_k, k = -K..K, in the orthonormal basis L^{-1/2} exp(2 pi i k x / L).
class SpectralField {
public:
    SpectralField() = default;
    SpectralField(int K, double L);
    SpectralField(int K, double L, std::vector<cplx> coeffs);

    int K() const { return K_; }
    double L() const { return L_; }
    int size() const { return 2 * K_ + 1; }

    cplx& operator[](int k) { return c_[k + K_]; }
    const cplx& operator[](int k) const { return c_[k + K_]; }
    std::vector<cplx>& data() { return c_; }
    const std::vector<cplx>& data() const { return c_; }

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(cplx a);

private:
    int K_ = 0;
    double L_ = 0.0;
    std::vector<cplx> c_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(cplx a, SpectralField f);

// Real inner product Re <a, b>.
double inner_re(const SpectralField& a, const SpectralField& b);

struct PhysicalField {
    int M = 0;
    double L = 0.0;
    std::vector<cplx> values; // phi(x_j), x_j = j L / M
};

PhysicalField to_grid(const SpectralField& f, int M);
SpectralField to_spectral(const PhysicalField& g, int K);

// Reusable grid buffers for repeated transforms of one (K, L, M) shape.
class GridOps {
public:
    GridOps(int K, double L, int M);

    int K() const { return K_; }
    int M() const { return M_; }
    double L() const { return L_; }

    // Synthesis onto the grid; result held in grid().
    void to_grid(const SpectralField& f);
    // Projection of grid() onto |k| <= K.
    void from_grid(SpectralField& f);
    std::vector<cplx>& grid() { return grid_; }
    const std::vector<cplx>& grid() const { return grid_; }

    // Quadrature of |phi|^p over the current grid.
    double lp_from_grid(double p) const;
    double sup_from_grid() const;

private:
    int K_, M_;
    double L_;
    Fft fft_;
    std::vector<cplx> spec_, grid_;
};

double l2_norm_sq(const SpectralField& f);
// int |phi|^p dx via the collocation grid; M = 0 picks the dealiased size.
double lp_norm_p(const SpectralField& f, double p, int M = 0);
double sup_norm(const SpectralField& f, int M = 0);
// sum ((2 pi k / L)^2 + m^2)^{2 gamma} |c_k|^2
double sobolev_norm_sq(const SpectralField& f, double gamma, double m);
// sum |2 pi k / L|^{4 gamma} |c_k|^2, i.e. ||(-Laplacian)^gamma phi||^2
double homogeneous_sobolev_sq(const SpectralField& f, double gamma);
// Grid estimate of sup |phi(x)-phi(y)| / |x-y|^alpha with the circle metric.
double holder_seminorm(const SpectralField& f, double alpha, int M);

double kinetic(const SpectralField& f);
double hamiltonian(const SpectralField& f, const ModelParams& P, int M = 0);
double effective_energy(const SpectralField& f, const ModelParams& P, int M = 0);
// Real Frechet gradient of effective_energy w.r.t. Re<.,.>.
SpectralField gradient_energy(const SpectralField& f, const ModelParams& P, int M = 0);
// Coefficients of P_K[|phi|^{p-2} phi] on the dealiased grid.
SpectralField nonlinear_term(const SpectralField& f, double p, int M = 0);

// Bounds in terms of grid quantities.
double linf_bound(const SpectralField& f, double alpha, int M);
double interpolation_bound(const SpectralField& f, double p, int M);

} // namespace snls

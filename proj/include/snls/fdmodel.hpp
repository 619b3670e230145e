#pragma once

#include <Eigen/Dense>

#include <map>
#include <vector>

namespace snls {

// Hermite: Galerkin for H0 + U in orthonormal Hermite polynomials (H0 diagonal).
// Transformed: the unitarily equivalent Dirichlet-form operator of
// exp(-V) d mu_0 on polynomials of the same total degree, i.e. trial functions
// exp(-V/2) p. The space contains the exact ground state. One mode only, where
// rotation invariance splits it into angular sectors with orthonormal radial
// polynomials. Auto picks Transformed whenever it applies.
enum class FdMethod { Auto, Hermite, Transformed };

// Finite-dimensional model on R^{2n} with Gaussian reference N(0, diag nu),
// noise sigma^2 = diag nu^{2s} and V(x) = g |x|^{2r} - quartic |x|^4.
// The transformed potential is U = 1/4 grad V . sigma^2 grad V + 1/2 H0 V.
struct FdModel {
    int n_modes = 1;
    std::vector<double> nu{1.0}; // one per complex mode; shared by its two coordinates
    double s = 0.47;
    int r = 2;
    double g = 1.0;
    double quartic = 0.0;
    int hermite_cut = 40; // total polynomial degree of the Galerkin basis
    FdMethod method = FdMethod::Auto;

    void validate() const;
    int dim() const { return 2 * n_modes; }
    double nu_coord(int i) const { return nu[i / 2]; }
    // Coefficients a_j of V = sum_j a_j |x|^{2j}.
    std::vector<double> v_coeffs() const;
};

// Sparse multivariate polynomial keyed by exponent vectors.
using Poly = std::map<std::vector<int>, double>;

Poly fd_potential_poly(const FdModel& m);
double poly_eval(const Poly& p, const double* x);
// Direct evaluation of U at x, without the polynomial expansion.
double fd_eval_U(const FdModel& m, const double* x);

struct GaussHermite {
    std::vector<double> nodes, weights; // for the standard normal weight; weights sum to 1
};
// Golub-Welsch nodes polished by Newton; weights from the Christoffel function.
GaussHermite gauss_hermite(int n);

// Orthonormal probabilists' Hermite values h_0..h_n at z.
std::vector<double> hermite_values(int n, double z);

// <h_a, z^e h_b> under N(0,1) for a, b <= cut, by quadrature of order 2 * cut.
Eigen::MatrixXd hermite_moment(int cut, int e);

struct FdBlock {
    std::vector<std::vector<int>> basis; // occupation numbers per coordinate
    Eigen::VectorXd h0;                  // diagonal of H0
    Eigen::MatrixXd U;                   // Galerkin matrix of U
};

// Blocks by coordinate parities; U only couples states of equal parity vector.
std::vector<FdBlock> fd_build(const FdModel& m);

// Eigenvalues of the transformed operator in angular sector ell >= 0 (each
// ell > 0 sector occurs twice in the full spectrum).
std::vector<double> fd_sector_spectrum(const FdModel& m, int ell);

// Sorted eigenvalues of H0 + U over all blocks.
Eigen::VectorXd fd_spectrum(const FdModel& m);

struct FdGap {
    double E0 = 0.0;
    double E1 = 0.0;
    double gap = 0.0;
};
FdGap fd_gap(const FdModel& m);

// sum_i exp(-2 t E_i) over the Galerkin spectrum.
double fd_trace(const FdModel& m, double t);
double fd_trace_free(const FdModel& m, double t);
double fd_cls_constant(const FdModel& m);
// int exp(-tau U) d mu_0 by tensor Gauss-Hermite quadrature with `nodes` per coordinate.
double fd_exp_integral(const FdModel& m, double tau, int nodes);
// Tr e^{-t H0} (int e^{-2 C_LS U} d mu_0)^{t / C_LS}
double fd_golden_thompson(const FdModel& m, double t, int nodes = 120);

} // namespace snls

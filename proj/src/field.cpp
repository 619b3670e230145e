#include "snls/field.hpp"

#include "snls/error.hpp"

#include <algorithm>
#include <cmath>

namespace snls {

double ModelParams::kappa_coeff() const {
    switch (kappa_form) {
    case KappaForm::Power: return kappa;
    case KappaForm::OverR: return kappa / r;
    case KappaForm::Over2R: return kappa / (2.0 * r);
    }
    return kappa;
}

double ModelParams::omega(int k) const {
    double q = wavenumber(k);
    return q * q + m * m;
}

int ModelParams::dealias_grid() const {
    double pad = std::max(2.0, std::ceil(p / 2.0));
    return int(next_power_of_two(long(std::ceil(pad * modes()))));
}

void ModelParams::validate() const {
    if (K < 0) throw ConfigError("model.K", "must be non-negative");
    if (!(L > 0)) throw ConfigError("model.L", "must be positive");
    if (!(beta > 0)) throw ConfigError("model.beta", "must be positive");
    if (!(m >= 0)) throw ConfigError("model.m", "must be non-negative");
    if (m == 0) throw ConfigError("model.m", "m = 0 leaves the k = 0 mode without a reference variance");
    if (!(p >= 2)) throw ConfigError("model.p", "must be at least 2");
    if (!(r >= 1)) throw ConfigError("model.r", "must be at least 1");
    if (!(kappa >= 0)) throw ConfigError("model.kappa", "must be non-negative");
    if (!std::isfinite(lambda)) throw ConfigError("model.lambda", "must be finite");
}

SpectralField::SpectralField(int K, double L) : K_(K), L_(L), c_(2 * K + 1) {}

SpectralField::SpectralField(int K, double L, std::vector<cplx> coeffs)
    : K_(K), L_(L), c_(std::move(coeffs)) {
    if (int(c_.size()) != 2 * K + 1)
        throw NumericalError(FaultKind::Domain, "coefficient vector length must be 2K+1");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(cplx a) {
    for (auto& c : c_) c *= a;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(cplx a, SpectralField f) { return f *= a; }

double inner_re(const SpectralField& a, const SpectralField& b) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += (std::conj(a.data()[i]) * b.data()[i]).real();
    return s;
}

GridOps::GridOps(int K, double L, int M)
    : K_(K), M_(M), L_(L), fft_(M), spec_(M), grid_(M) {
    if (M < 2 * K + 1)
        throw NumericalError(FaultKind::Truncation, "grid of " + std::to_string(M) +
                                                        " points cannot resolve K = " + std::to_string(K));
}

void GridOps::to_grid(const SpectralField& f) {
    std::fill(spec_.begin(), spec_.end(), cplx(0.0));
    double s = 1.0 / std::sqrt(L_);
    for (int k = -K_; k <= K_; ++k) spec_[(k + M_) % M_] = f[k] * s;
    fft_.backward(spec_.data(), grid_.data());
}

void GridOps::from_grid(SpectralField& f) {
    fft_.forward(grid_.data(), spec_.data());
    double s = std::sqrt(L_) / M_;
    for (int k = -K_; k <= K_; ++k) f[k] = spec_[(k + M_) % M_] * s;
}

double GridOps::lp_from_grid(double p) const {
    double s = 0.0;
    if (p == 4.0) {
        for (const auto& v : grid_) {
            double a = std::norm(v);
            s += a * a;
        }
    } else if (p == 2.0) {
        for (const auto& v : grid_) s += std::norm(v);
    } else {
        for (const auto& v : grid_) s += std::pow(std::abs(v), p);
    }
    return s * L_ / M_;
}

double GridOps::sup_from_grid() const {
    double s = 0.0;
    for (const auto& v : grid_) s = std::max(s, std::norm(v));
    return std::sqrt(s);
}

PhysicalField to_grid(const SpectralField& f, int M) {
    if (!is_power_of_two(M))
        throw NumericalError(FaultKind::Domain, "grid size must be a power of two");
    GridOps ops(f.K(), f.L(), M);
    ops.to_grid(f);
    return PhysicalField{M, f.L(), ops.grid()};
}

SpectralField to_spectral(const PhysicalField& g, int K) {
    GridOps ops(K, g.L, g.M);
    ops.grid() = g.values;
    SpectralField f(K, g.L);
    ops.from_grid(f);
    return f;
}

namespace {

int default_grid(const SpectralField& f, double p) {
    ModelParams P;
    P.K = f.K();
    P.p = p;
    return P.dealias_grid();
}

void require_dealiased(const SpectralField& f, double p, int M) {
    double need = std::max(1.0, p / 2.0) * f.size();
    if (M < need)
        throw NumericalError(FaultKind::Dealiasing, "grid of " + std::to_string(M) + " points is below " +
                                                        std::to_string(need) + " needed for p = " +
                                                        std::to_string(p));
}

} // namespace

double l2_norm_sq(const SpectralField& f) {
    double s = 0.0;
    for (const auto& c : f.data()) s += std::norm(c);
    return s;
}

double lp_norm_p(const SpectralField& f, double p, int M) {
    if (M == 0) M = default_grid(f, p);
    require_dealiased(f, p, M);
    GridOps ops(f.K(), f.L(), M);
    ops.to_grid(f);
    return ops.lp_from_grid(p);
}

double sup_norm(const SpectralField& f, int M) {
    if (M == 0) M = default_grid(f, 4.0);
    GridOps ops(f.K(), f.L(), M);
    ops.to_grid(f);
    return ops.sup_from_grid();
}

double sobolev_norm_sq(const SpectralField& f, double gamma, double m) {
    double s = 0.0;
    for (int k = -f.K(); k <= f.K(); ++k) {
        double q = 2.0 * std::numbers::pi * k / f.L();
        s += std::pow(q * q + m * m, 2.0 * gamma) * std::norm(f[k]);
    }
    return s;
}

double homogeneous_sobolev_sq(const SpectralField& f, double gamma) {
    double s = 0.0;
    for (int k = -f.K(); k <= f.K(); ++k) {
        if (k == 0) continue;
        double q = std::abs(2.0 * std::numbers::pi * k / f.L());
        s += std::pow(q, 4.0 * gamma) * std::norm(f[k]);
    }
    return s;
}

double holder_seminorm(const SpectralField& f, double alpha, int M) {
    if (!(alpha > 0 && alpha < 1)) throw NumericalError(FaultKind::Domain, "alpha must lie in (0, 1)");
    GridOps ops(f.K(), f.L(), M);
    ops.to_grid(f);
    const auto& g = ops.grid();
    double h = f.L() / M;
    double best = 0.0;
    for (int d = 1; d <= M / 2; ++d) {
        double w = 1.0 / std::pow(d * h, alpha);
        double mx = 0.0;
        for (int j = 0; j < M; ++j) mx = std::max(mx, std::norm(g[(j + d) % M] - g[j]));
        best = std::max(best, std::sqrt(mx) * w);
    }
    return best;
}

double kinetic(const SpectralField& f) {
    double s = 0.0;
    for (int k = -f.K(); k <= f.K(); ++k) {
        double q = 2.0 * std::numbers::pi * k / f.L();
        s += q * q * std::norm(f[k]);
    }
    return 0.5 * s;
}

double hamiltonian(const SpectralField& f, const ModelParams& P, int M) {
    double pot = P.lambda == 0.0 ? 0.0 : P.lambda / P.p * lp_norm_p(f, P.p, M);
    return kinetic(f) - pot;
}

double effective_energy(const SpectralField& f, const ModelParams& P, int M) {
    double N = l2_norm_sq(f);
    return hamiltonian(f, P, M) + 0.5 * P.m * P.m * N + P.kappa_coeff() * std::pow(N, P.r);
}

SpectralField nonlinear_term(const SpectralField& f, double p, int M) {
    if (M == 0) M = default_grid(f, p);
    require_dealiased(f, p, M);
    GridOps ops(f.K(), f.L(), M);
    ops.to_grid(f);
    for (auto& v : ops.grid()) {
        double a = std::abs(v);
        v *= (p == 4.0) ? a * a : std::pow(a, p - 2.0);
    }
    SpectralField out(f.K(), f.L());
    ops.from_grid(out);
    return out;
}

SpectralField gradient_energy(const SpectralField& f, const ModelParams& P, int M) {
    double N = l2_norm_sq(f);
    SpectralField g(f.K(), f.L());
    if (P.lambda != 0.0) g = nonlinear_term(f, P.p, M) *= cplx(-P.lambda);
    double conf = P.r == 1.0 ? 2.0 * P.kappa_coeff() : 2.0 * P.r * P.kappa_coeff() * std::pow(N, P.r - 1.0);
    for (int k = -f.K(); k <= f.K(); ++k) g[k] += (P.omega(k) + conf) * f[k];
    return g;
}

double linf_bound(const SpectralField& f, double alpha, int M) {
    double n2 = std::sqrt(l2_norm_sq(f));
    double hol = holder_seminorm(f, alpha, M);
    return n2 / std::sqrt(f.L()) +
           2.0 * std::pow(n2, 2.0 * alpha / (2.0 * alpha + 1.0)) * std::pow(hol, 1.0 / (2.0 * alpha + 1.0));
}

double interpolation_bound(const SpectralField& f, double p, int M) {
    return l2_norm_sq(f) * std::pow(sup_norm(f, M), p - 2.0);
}

} // namespace snls

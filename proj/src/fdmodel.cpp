#include "snls/fdmodel.hpp"

#include "snls/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace snls {

void FdModel::validate() const {
    if (n_modes < 1 || n_modes > 3) throw ConfigError("fdm.n_modes", "must be 1, 2 or 3");
    if (int(nu.size()) != n_modes) throw ConfigError("fdm.nu", "needs one covariance per mode");
    for (double v : nu)
        if (!(v > 0)) throw ConfigError("fdm.nu", "covariances must be positive");
    if (r < 1) throw ConfigError("fdm.r", "must be at least 1");
    if (!(s > 0)) throw ConfigError("fdm.s", "must be positive");
    if (hermite_cut < 4 || hermite_cut > 80) throw ConfigError("fdm.hermite_cut", "must lie in [4, 80]");
    if (g < 0) throw ConfigError("fdm.g", "must be non-negative");
    if (quartic != 0.0) {
        bool confined = (r > 2 && g > 0) || (r == 2 && g > quartic);
        if (!confined) throw ConfigError("fdm.quartic", "quartic term not dominated by g |x|^{2r}");
    }
}

std::vector<double> FdModel::v_coeffs() const {
    std::vector<double> a(std::max(r, 2) + 1, 0.0);
    a[r] += g;
    a[2] -= quartic;
    return a;
}

// ---------------------------------------------------------------- polynomials

namespace {

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            std::vector<int> e(ea.size());
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            out[e] += ca * cb;
        }
    return out;
}

void poly_axpy(Poly& y, double a, const Poly& x) {
    for (const auto& [e, c] : x) y[e] += a * c;
}

Poly poly_const(int dim, double c) { return Poly{{std::vector<int>(dim, 0), c}}; }

Poly poly_quadratic(const std::vector<double>& w) {
    Poly p;
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::vector<int> e(w.size(), 0);
        e[i] = 2;
        p[e] = w[i];
    }
    return p;
}

void poly_prune(Poly& p) {
    for (auto it = p.begin(); it != p.end();)
        it = it->second == 0.0 ? p.erase(it) : std::next(it);
}

} // namespace

Poly fd_potential_poly(const FdModel& m) {
    m.validate();
    int D = m.dim();
    std::vector<double> sig2(D), sig2c(D), ones(D, 1.0);
    double T = 0.0;
    for (int i = 0; i < D; ++i) {
        double nu = m.nu_coord(i);
        sig2[i] = std::pow(nu, 2.0 * m.s);
        sig2c[i] = sig2[i] / nu;
        T += sig2[i];
    }
    auto a = m.v_coeffs();
    int J = int(a.size()) - 1;
    Poly rho = poly_quadratic(ones);
    std::vector<Poly> rp{poly_const(D, 1.0)};
    for (int j = 1; j <= J; ++j) rp.push_back(poly_mul(rp.back(), rho));

    Poly fp, fpp; // f'(rho), f''(rho) as polynomials in x
    for (int j = 1; j <= J; ++j) poly_axpy(fp, j * a[j], rp[j - 1]);
    for (int j = 2; j <= J; ++j) poly_axpy(fpp, j * (j - 1) * a[j], rp[j - 2]);

    Poly qs = poly_quadratic(sig2), qc = poly_quadratic(sig2c);
    Poly U;
    poly_axpy(U, 1.0, poly_mul(poly_mul(fp, fp), qs));
    poly_axpy(U, -T, fp);
    poly_axpy(U, -2.0, poly_mul(fpp, qs));
    poly_axpy(U, 1.0, poly_mul(fp, qc));
    poly_prune(U);
    return U;
}

double poly_eval(const Poly& p, const double* x) {
    double s = 0.0;
    for (const auto& [e, c] : p) {
        double t = c;
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i]) t *= std::pow(x[i], e[i]);
        s += t;
    }
    return s;
}

double fd_eval_U(const FdModel& m, const double* x) {
    int D = m.dim();
    double rho = 0.0, qs = 0.0, qc = 0.0, T = 0.0;
    for (int i = 0; i < D; ++i) {
        double nu = m.nu_coord(i), s2 = std::pow(nu, 2.0 * m.s);
        rho += x[i] * x[i];
        qs += s2 * x[i] * x[i];
        qc += s2 / nu * x[i] * x[i];
        T += s2;
    }
    auto a = m.v_coeffs();
    double fp = 0.0, fpp = 0.0;
    for (std::size_t j = 1; j < a.size(); ++j) fp += j * a[j] * std::pow(rho, double(j) - 1.0);
    for (std::size_t j = 2; j < a.size(); ++j) fpp += j * (j - 1.0) * a[j] * std::pow(rho, double(j) - 2.0);
    return fp * fp * qs - fp * T - 2.0 * fpp * qs + fp * qc;
}

// ---------------------------------------------------------------- quadrature

std::vector<double> hermite_values(int n, double z) {
    std::vector<double> h(n + 1);
    h[0] = 1.0;
    if (n >= 1) h[1] = z;
    for (int k = 1; k < n; ++k) h[k + 1] = (z * h[k] - std::sqrt(double(k)) * h[k - 1]) / std::sqrt(k + 1.0);
    return h;
}

GaussHermite gauss_hermite(int n) {
    if (n < 1) throw NumericalError(FaultKind::Domain, "quadrature order must be positive");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(double(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError(FaultKind::Accuracy, "Jacobi eigensolve failed");
    GaussHermite gh;
    for (int i = 0; i < n; ++i) {
        double z = es.eigenvalues()(i);
        for (int it = 0; it < 3; ++it) {
            auto h = hermite_values(n, z);
            double d = std::sqrt(double(n)) * h[n - 1];
            if (d != 0.0) z -= h[n] / d;
        }
        auto h = hermite_values(n - 1, z);
        double s = 0.0;
        for (double v : h) s += v * v;
        gh.nodes.push_back(z);
        gh.weights.push_back(1.0 / s);
    }
    return gh;
}

Eigen::MatrixXd hermite_moment(int cut, int e) {
    if (e > 2 * cut - 1)
        throw NumericalError(FaultKind::Accuracy, "moment degree " + std::to_string(e) +
                                                      " not resolved by quadrature order " + std::to_string(2 * cut));
    auto gh = gauss_hermite(2 * cut);
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(cut + 1, cut + 1);
    for (std::size_t q = 0; q < gh.nodes.size(); ++q) {
        auto h = hermite_values(cut, gh.nodes[q]);
        double we = gh.weights[q] * std::pow(gh.nodes[q], e);
        for (int a = 0; a <= cut; ++a)
            for (int b = 0; b <= cut; ++b) Z(a, b) += we * h[a] * h[b];
    }
    return Z;
}

// ---------------------------------------------------------------- Galerkin

namespace {

void enumerate_basis(int D, int cut, std::vector<int>& cur, int i, int left,
                     std::vector<std::vector<int>>& out) {
    if (i == D) {
        out.push_back(cur);
        return;
    }
    for (int k = 0; k <= left; ++k) {
        cur[i] = k;
        enumerate_basis(D, cut, cur, i + 1, left - k, out);
    }
}

std::map<int, std::vector<std::vector<int>>> parity_blocks(int D, int cut) {
    std::vector<std::vector<int>> all;
    std::vector<int> cur(D);
    enumerate_basis(D, cut, cur, 0, cut, all);
    std::map<int, std::vector<std::vector<int>>> out;
    for (const auto& b : all) {
        int key = 0;
        for (int i = 0; i < D; ++i) key |= (b[i] & 1) << i;
        out[key].push_back(b);
    }
    return out;
}

} // namespace

std::vector<FdBlock> fd_build(const FdModel& m) {
    m.validate();
    const int D = m.dim(), cut = m.hermite_cut;
    Poly U = fd_potential_poly(m);

    int emax = 0;
    for (const auto& [e, c] : U)
        for (int v : e) emax = std::max(emax, v);
    if (emax > 2 * cut - 1)
        throw NumericalError(FaultKind::Accuracy, "r = " + std::to_string(m.r) + " too large for hermite_cut = " +
                                                      std::to_string(cut));

    std::map<int, Eigen::MatrixXd> Z;
    for (const auto& [e, c] : U)
        for (int v : e)
            if (!Z.count(v)) Z.emplace(v, hermite_moment(cut, v));

    struct Mono {
        std::vector<const Eigen::MatrixXd*> mats;
        double coeff;
    };
    std::vector<Mono> monos;
    for (const auto& [e, c] : U) {
        Mono mo{{}, c};
        for (int i = 0; i < D; ++i) {
            mo.mats.push_back(&Z.at(e[i]));
            mo.coeff *= std::pow(m.nu_coord(i), 0.5 * e[i]);
        }
        monos.push_back(mo);
    }

    std::vector<double> rate(D);
    for (int i = 0; i < D; ++i) rate[i] = std::pow(m.nu_coord(i), 2.0 * m.s - 1.0);

    auto by_parity = parity_blocks(D, cut);
    std::vector<FdBlock> blocks;
    for (auto& [key, basis] : by_parity) {
        FdBlock blk;
        blk.basis = std::move(basis);
        int n = int(blk.basis.size());
        blk.h0.resize(n);
        blk.U.resize(n, n);
        for (int a = 0; a < n; ++a) {
            double h = 0.0;
            for (int i = 0; i < D; ++i) h += blk.basis[a][i] * rate[i];
            blk.h0(a) = h;
            for (int b = 0; b < n; ++b) {
                double s = 0.0;
                for (const auto& mo : monos) {
                    double t = mo.coeff;
                    for (int i = 0; i < D && t != 0.0; ++i) t *= (*mo.mats[i])(blk.basis[a][i], blk.basis[b][i]);
                    s += t;
                }
                blk.U(a, b) = s;
            }
        }
        double asym = (blk.U - blk.U.transpose()).cwiseAbs().maxCoeff();
        double scale = std::max(1.0, blk.U.cwiseAbs().maxCoeff());
        if (asym > 1e-12 * scale) throw NumericalError(FaultKind::Accuracy, "assembled U is not symmetric");
        blocks.push_back(std::move(blk));
    }
    return blocks;
}

namespace {

// Composite Gauss-Legendre rule on [0, T].
void legendre_panels(double T, int panels, std::vector<double>& x, std::vector<double>& w) {
    constexpr int q = 20;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q, q);
    for (int i = 1; i < q; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    double h = T / panels;
    for (int p = 0; p < panels; ++p)
        for (int i = 0; i < q; ++i) {
            double v0 = es.eigenvectors()(0, i);
            x.push_back(h * (p + 0.5 * (es.eigenvalues()(i) + 1.0)));
            w.push_back(h * v0 * v0); // weights of [-1, 1] sum to 2, halved by the map
        }
}

} // namespace

std::vector<double> fd_sector_spectrum(const FdModel& m, int ell) {
    m.validate();
    if (m.n_modes != 1) throw ConfigError("fdm.method", "the transformed solver handles one mode only");
    if (ell < 0 || ell > m.hermite_cut) throw NumericalError(FaultKind::Domain, "angular sector out of range");
    const double nu = m.nu[0], sig2 = std::pow(nu, 2.0 * m.s);
    const int deg = (m.hermite_cut - ell) / 2; // radial degree in t = |x|^2
    auto a = m.v_coeffs();
    // phi(t) = t / (2 nu) + V(t); weight t^ell exp(-phi) on t >= 0.
    auto phi = [&](double t) {
        double v = t / (2.0 * nu);
        for (std::size_t j = 1; j < a.size(); ++j) v += a[j] * std::pow(t, double(j));
        return v;
    };
    double T = 1.0;
    while (phi(T) - ell * std::log(T) < 800.0) T *= 1.5;

    std::vector<double> t, w;
    legendre_panels(T, 200, t, w);
    const std::size_t nq = t.size();
    std::vector<double> wt(nq), wa(nq);
    for (std::size_t j = 0; j < nq; ++j) {
        double e = std::exp(-phi(t[j]));
        wt[j] = w[j] * std::pow(t[j], ell) * e;
        wa[j] = ell > 0 ? w[j] * std::pow(t[j], ell - 1) * e : 0.0;
    }

    // Discretized Stieltjes: orthonormal q_n and q_n' at the nodes.
    std::vector<std::vector<double>> Q(deg + 1, std::vector<double>(nq)), dQ(deg + 1, std::vector<double>(nq, 0.0));
    double mass = 0.0;
    for (double v : wt) mass += v;
    for (std::size_t j = 0; j < nq; ++j) Q[0][j] = 1.0 / std::sqrt(mass);
    double b_prev = 0.0;
    for (int n = 0; n < deg; ++n) {
        double an = 0.0;
        for (std::size_t j = 0; j < nq; ++j) an += wt[j] * t[j] * Q[n][j] * Q[n][j];
        std::vector<double> u(nq), du(nq);
        for (std::size_t j = 0; j < nq; ++j) {
            u[j] = (t[j] - an) * Q[n][j] - (n > 0 ? b_prev * Q[n - 1][j] : 0.0);
            du[j] = Q[n][j] + (t[j] - an) * dQ[n][j] - (n > 0 ? b_prev * dQ[n - 1][j] : 0.0);
        }
        double bn = 0.0;
        for (std::size_t j = 0; j < nq; ++j) bn += wt[j] * u[j] * u[j];
        bn = std::sqrt(bn);
        if (!(bn > 0)) throw NumericalError(FaultKind::Quadrature, "radial polynomial basis degenerated");
        for (std::size_t j = 0; j < nq; ++j) {
            Q[n + 1][j] = u[j] / bn;
            dQ[n + 1][j] = du[j] / bn;
        }
        b_prev = bn;
    }

    // |dR/dr|^2 + ell^2 R^2 / r^2 with R = r^ell q(r^2), in terms of t; the
    // common factor of the measure cancels against the Gram normalization.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(deg + 1, deg + 1), G = A;
    for (int n = 0; n <= deg; ++n)
        for (int k = 0; k <= n; ++k) {
            double sa = 0.0, sg = 0.0;
            for (std::size_t j = 0; j < nq; ++j) {
                double fn = 2.0 * t[j] * dQ[n][j], fk = 2.0 * t[j] * dQ[k][j];
                if (ell == 0) {
                    sa += w[j] * std::exp(-phi(t[j])) * fn * fk / t[j];
                } else {
                    fn += ell * Q[n][j];
                    fk += ell * Q[k][j];
                    sa += wa[j] * (fn * fk + double(ell) * ell * Q[n][j] * Q[k][j]);
                }
                sg += wt[j] * Q[n][j] * Q[k][j];
            }
            A(n, k) = A(k, n) = sig2 * sa;
            G(n, k) = G(k, n) = sg;
        }
    if ((G - Eigen::MatrixXd::Identity(deg + 1, deg + 1)).cwiseAbs().maxCoeff() > 1e-9)
        throw NumericalError(FaultKind::Quadrature, "radial basis lost orthonormality");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError(FaultKind::Accuracy, "eigensolve did not converge");
    return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

Eigen::VectorXd fd_spectrum(const FdModel& m) {
    bool transformed = m.method == FdMethod::Transformed || (m.method == FdMethod::Auto && m.n_modes == 1);
    std::vector<double> ev;
    if (transformed) {
        for (int ell = 0; ell <= m.hermite_cut; ++ell) {
            auto e = fd_sector_spectrum(m, ell);
            for (int rep = 0; rep < (ell > 0 ? 2 : 1); ++rep) ev.insert(ev.end(), e.begin(), e.end());
        }
    } else {
        for (const auto& blk : fd_build(m)) {
            Eigen::MatrixXd H = blk.U;
            H.diagonal() += blk.h0;
            H = 0.5 * (H + H.transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
            if (es.info() != Eigen::Success) throw NumericalError(FaultKind::Accuracy, "eigensolve did not converge");
            for (int i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(es.eigenvalues()(i));
        }
    }
    std::sort(ev.begin(), ev.end());
    return Eigen::Map<Eigen::VectorXd>(ev.data(), Eigen::Index(ev.size()));
}

FdGap fd_gap(const FdModel& m) {
    auto ev = fd_spectrum(m);
    FdGap g;
    g.E0 = ev(0);
    g.E1 = ev(1);
    g.gap = g.E1 - g.E0;
    return g;
}

double fd_trace(const FdModel& m, double t) {
    auto ev = fd_spectrum(m);
    double s = 0.0;
    for (int i = 0; i < ev.size(); ++i) s += std::exp(-2.0 * t * ev(i));
    return s;
}

double fd_trace_free(const FdModel& m, double t) {
    double lg = 0.0;
    for (int i = 0; i < m.dim(); ++i) lg -= std::log1p(-std::exp(-t * std::pow(m.nu_coord(i), 2.0 * m.s - 1.0)));
    return std::exp(lg);
}

double fd_cls_constant(const FdModel& m) {
    double c = 0.0;
    for (double v : m.nu) c = std::max(c, 2.0 * std::pow(v, 1.0 - 2.0 * m.s));
    return c;
}

double fd_exp_integral(const FdModel& m, double tau, int nodes) {
    m.validate();
    const int D = m.dim();
    auto gh = gauss_hermite(nodes);
    std::vector<double> lw(nodes);
    for (int q = 0; q < nodes; ++q) lw[q] = std::log(gh.weights[q]);
    std::vector<int> idx(D, 0);
    std::vector<double> x(D), terms;
    while (true) {
        double l = 0.0;
        for (int i = 0; i < D; ++i) {
            x[i] = std::sqrt(m.nu_coord(i)) * gh.nodes[idx[i]];
            l += lw[idx[i]];
        }
        terms.push_back(l - tau * fd_eval_U(m, x.data()));
        int i = 0;
        while (i < D && ++idx[i] == nodes) idx[i++] = 0;
        if (i == D) break;
    }
    double mx = *std::max_element(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += std::exp(t - mx);
    return std::exp(mx) * s;
}

double fd_golden_thompson(const FdModel& m, double t, int nodes) {
    double C = fd_cls_constant(m);
    return fd_trace_free(m, t) * std::pow(fd_exp_integral(m, 2.0 * C, nodes), t / C);
}

} // namespace snls

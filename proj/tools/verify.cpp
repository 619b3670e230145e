#include "verify.hpp"

#include "snls/error.hpp"
#include "snls/operators.hpp"
#include "snls/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

namespace snls::cli {

namespace {

using std::numbers::pi;

struct Invariant {
    std::string name;
    double threshold;
    bool at_least;
    std::function<double(const ModelParams&, Stream&)> statistic;
};

SpectralField random_field(Stream& s, int K, double L, double decay) {
    SpectralField f(K, L);
    for (int k = -K; k <= K; ++k) f[k] = cplx(s.normal(), s.normal()) / std::pow(1.0 + k * k, decay);
    return f;
}

// Suites run on a reduced copy of the configured model so they finish in
// seconds.
ModelParams fixture(const json& cfg) {
    auto P = model_params(cfg);
    P.K = std::min(P.K, 16);
    return P;
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    double d = 0.0;
    for (int k = -a.K(); k <= a.K(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

std::vector<Invariant> field_suite() {
    return {
        {"grid_roundtrip", 1e-12, false,
         [](const ModelParams& P, Stream& s) {
             auto f = random_field(s, P.K, P.L, 0.75);
             auto g = to_spectral(to_grid(f, P.dealias_grid()), P.K);
             return max_abs_diff(f, g) / std::sqrt(l2_norm_sq(f));
         }},
        {"parseval", 1e-12, false,
         [](const ModelParams& P, Stream& s) {
             auto f = random_field(s, P.K, P.L, 0.75);
             double n = l2_norm_sq(f);
             return std::abs(lp_norm_p(f, 2.0, P.dealias_grid()) - n) / n;
         }},
        {"gradient_fd", 1e-6, false,
         [](const ModelParams& P0, Stream& s) {
             ModelParams P = P0;
             P.K = 8;
             P.r = 3.0; // keeps the confining term from swamping the difference quotient
             P.kappa = std::min(P.kappa, 0.05);
             auto f = random_field(s, P.K, P.L, 1.0);
             f *= cplx(0.4);
             auto g = gradient_energy(f, P);
             double worst = 0.0;
             for (int t = 0; t < 20; ++t) {
                 auto h = random_field(s, P.K, P.L, 1.0);
                 const double e = 1e-5;
                 double fd = (effective_energy(f + cplx(e) * h, P) - effective_energy(f - cplx(e) * h, P)) / (2 * e);
                 worst = std::max(worst, std::abs(fd - inner_re(g, h)) / std::max(1.0, std::abs(fd)));
             }
             return worst;
         }},
        {"linf_violations", 0.0, false,
         [](const ModelParams& P, Stream& s) {
             int bad = 0;
             for (int t = 0; t < 200; ++t) {
                 auto f = random_field(s, P.K, P.L, 0.5 + 0.5 * s.uniform());
                 if (sup_norm(f, 512) > linf_bound(f, 0.4, 512) * (1 + 1e-12)) ++bad;
             }
             return double(bad);
         }},
        {"interpolation_violations", 0.0, false,
         [](const ModelParams& P, Stream& s) {
             int bad = 0;
             for (int t = 0; t < 200; ++t) {
                 auto f = random_field(s, P.K, P.L, 0.5 + 0.5 * s.uniform());
                 if (lp_norm_p(f, 4.0, 512) > interpolation_bound(f, 4.0, 512) * (1 + 1e-12)) ++bad;
             }
             return double(bad);
         }},
    };
}

std::vector<Invariant> measures_suite() {
    return {
        {"free_mean_N_zscore", 4.0, false,
         [](const ModelParams& P, Stream& s) {
             auto law = mode_law(P);
             std::vector<double> n;
             for (int i = 0; i < 4000; ++i) {
                 auto st = s.split(i);
                 n.push_back(l2_norm_sq(sample_free(P, st)));
             }
             return std::abs(mean(n) - law.mean_N()) / std_error(n);
         }},
        {"density_mass", 1e-6, false,
         [](const ModelParams& P, Stream&) {
             NDensity rho(mode_law(P));
             return std::abs(rho.integrate([](double) { return 1.0; }) - 1.0);
         }},
        {"density_mean", 1e-4, false,
         [](const ModelParams& P, Stream&) {
             auto law = mode_law(P);
             NDensity rho(law);
             return std::abs(rho.integrate([](double n) { return n; }) - law.mean_N()) / law.mean_N();
         }},
        {"fejer_mass", 1e-10, false,
         [](const ModelParams&, Stream&) {
             // Trapezoid on a periodic integrand is spectrally accurate.
             const int n = 4096;
             double sum = 0.0;
             for (int j = 0; j < n; ++j) sum += fejer_kernel(-pi + 2.0 * pi * j / n, 8);
             return std::abs(sum * 2.0 * pi / n - 2.0 * pi) / (2.0 * pi);
         }},
        {"ggc_chain_acceptance", 0.05, true,
         [](const ModelParams& P, Stream& s) {
             ChainConfig cc;
             cc.burn_in = 1000;
             cc.thin = 5;
             return sample_ggc(P, cc, 200, s).acceptance;
         }},
    };
}

std::vector<Invariant> dynamics_suite() {
    return {
        {"nls_mass_drift", 1e-12, false,
         [](const ModelParams& P, Stream& s) {
             auto f = random_field(s, P.K, P.L, 1.5);
             NlsStepper st(P, 1e-3);
             double n0 = l2_norm_sq(f), worst = 0.0;
             for (int i = 0; i < 2000; ++i) {
                 st.step(f);
                 worst = std::max(worst, std::abs(l2_norm_sq(f) - n0) / n0);
             }
             return worst;
         }},
        {"nls_energy_drift", 1e-5, false,
         [](const ModelParams& P, Stream& s) {
             auto f = random_field(s, P.K, P.L, 1.5);
             NlsStepper st(P, 1e-3);
             int M = P.dealias_grid();
             double h0 = hamiltonian(f, P, M), worst = 0.0;
             for (int i = 0; i < 2000; ++i) {
                 st.step(f);
                 if (i % 50 == 49) worst = std::max(worst, std::abs(hamiltonian(f, P, M) - h0) / std::abs(h0));
             }
             return worst;
         }},
        {"canonical_sphere", 1e-12, false,
         [](const ModelParams& P, Stream& s) {
             auto noise = make_noise(P, 0.47, true);
             const double n = 1.0;
             auto f = sample_free(P, s);
             f *= cplx(std::sqrt(n / l2_norm_sq(f)));
             CanonicalStepper st(P, noise, 1e-3, n);
             double worst = 0.0;
             for (int i = 0; i < 5000; ++i) {
                 st.step(f, s);
                 worst = std::max(worst, std::abs(l2_norm_sq(f) - n) / n);
             }
             return worst;
         }},
        {"ou_stationary_zscore", 4.0, false,
         [](const ModelParams& P0, Stream& s) {
             // Free flow started in equilibrium keeps E|X_0|^2 = 2/theta_0.
             ModelParams P = P0;
             P.K = 4;
             P.lambda = 0.0;
             P.kappa = 0.0;
             auto noise = make_noise(P, 0.47, true);
             auto law = mode_law(P);
             GgcStepper st(P, noise, 0.1);
             auto f = sample_free(P, s);
             std::vector<double> x;
             for (int i = 0; i < 40000; ++i) {
                 st.step(f, s);
                 x.push_back(std::norm(f[0]));
             }
             double expect = 2.0 / law.theta[std::find(law.k.begin(), law.k.end(), 0) - law.k.begin()];
             return std::abs(mean(x) - expect) / batch_std_error(x, 50);
         }},
    };
}

std::vector<Invariant> operators_suite() {
    return {
        {"trace_occupation", 1e-10, false,
         [](const ModelParams& P, Stream&) {
             FreeOperatorSpec spec;
             spec.s = 0.47;
             spec.nu = {1.0 / (P.beta * P.omega(0))};
             double rate = spec.rates()[0], worst = 0.0;
             for (double t : {0.5, 1.0, 2.0}) {
                 double sum = 0.0;
                 for (int a = 0; a <= 200; ++a)
                     for (int b = 0; b <= 200; ++b) sum += std::exp(-t * rate * (a + b));
                 worst = std::max(worst, std::abs(trace_free(t, spec) - sum) / sum);
             }
             return worst;
         }},
        {"golden_thompson_margin", 0.0, true,
         [](const ModelParams&, Stream&) {
             FdModel m;
             double worst = 1e300;
             for (double t : {0.5, 1.0, 2.0}) {
                 double tr = fd_trace(m, t);
                 worst = std::min(worst, (fd_golden_thompson(m, t) - tr) / tr);
             }
             return worst;
         }},
        {"fd_gap", 1e-8, true, [](const ModelParams&, Stream&) { return fd_gap(FdModel{}).gap; }},
        {"U_lower_bound_violations", 0.0, false,
         [](const ModelParams& P0, Stream& s) {
             // At lambda = 0: U >= -beta c A ((r-1)A/r)^{r-1}, A = Tr sigma^2 + 2(r-1) max sigma^2.
             ModelParams P = P0;
             P.K = 8;
             P.lambda = 0.0;
             if (!(P.kappa > 0)) P.kappa = 1.0;
             auto noise = make_noise(P, 0.47, true);
             double A = noise.trace_sq_real() + 2.0 * (P.r - 1.0) * noise.max_sq();
             double c = P.kappa_coeff();
             double bound = -P.beta * c * A * std::pow((P.r - 1.0) * A / P.r, P.r - 1.0);
             int bad = 0;
             for (int t = 0; t < 200; ++t) {
                 auto f = random_field(s, P.K, P.L, 0.75);
                 f *= cplx(std::sqrt(2.0 * s.uniform() / l2_norm_sq(f)));
                 if (effective_potential(f, P, noise) < bound * (1 + 1e-12)) ++bad;
             }
             return double(bad);
         }},
    };
}

std::vector<Invariant> suite(const std::string& name) {
    if (name == "field") return field_suite();
    if (name == "measures") return measures_suite();
    if (name == "dynamics") return dynamics_suite();
    if (name == "operators") return operators_suite();
    throw ConfigError("verify.suite", "one of field, measures, dynamics, operators");
}

} // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"field", "measures", "dynamics", "operators"};
    return names;
}

std::vector<std::pair<std::string, double>> suite_invariants(const std::string& name) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& inv : suite(name)) out.emplace_back(inv.name, inv.threshold);
    return out;
}

std::vector<ReportRow> run_suite(const std::string& name, const json& cfg) {
    auto invs = suite(name);
    const json& tol = cfg.at("verify").at("tolerances");
    for (auto it = tol.begin(); it != tol.end(); ++it)
        if (std::none_of(invs.begin(), invs.end(), [&](const Invariant& v) { return v.name == it.key(); }))
            throw ConfigError("verify.tolerances." + it.key(), "no such invariant in suite " + name);

    auto P = fixture(cfg);
    Stream master(cfg.at("seed").get<std::uint64_t>(), 0);
    std::vector<ReportRow> rows;
    for (std::size_t i = 0; i < invs.size(); ++i) {
        ReportRow r;
        r.name = invs[i].name;
        r.at_least = invs[i].at_least;
        r.threshold = tol.contains(r.name) ? tol[r.name].get<double>() : invs[i].threshold;
        auto s = master.split(i);
        r.statistic = invs[i].statistic(P, s);
        r.pass = std::isfinite(r.statistic) && (r.at_least ? r.statistic >= r.threshold : r.statistic <= r.threshold);
        rows.push_back(r);
    }
    return rows;
}

} // namespace snls::cli

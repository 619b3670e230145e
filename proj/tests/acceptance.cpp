// Acceptance run: one PASS/FAIL line per criterion.

#include "snls/dynamics.hpp"
#include "snls/error.hpp"
#include "snls/fdmodel.hpp"
#include "snls/measures.hpp"
#include "snls/operators.hpp"
#include "snls/relaxation.hpp"
#include "snls/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

using namespace snls;
using std::numbers::pi;

namespace {

constexpr std::uint64_t kSeed = 20261018;

// Tolerances, pinned.
constexpr double kNRel = 1e-12;          // 1: |dN| / N
constexpr double kHRel = 1e-6;           // 1: |dH| / |H|
constexpr double kModeSigmas = 3.0;      // 2: per-mode deviation in std. errors
constexpr double kKsLevel = 0.01;        // 3: minimum KS p-value
constexpr double kR2 = 0.9;              // 4: minimum R^2 of the decay fit
constexpr double kTraceRel = 1e-10;      // 6: product formula vs occupation sum
constexpr double kScalingSigmas = 3.0;   // 8: combined std. errors
constexpr double kCurvature = 10.0;      // 8: second difference / its error
constexpr double kSphereRel = 1e-14;     // 9: |N - n| / n after renormalization
constexpr double kDriftStability = 0.10; // 9: relative change of the drift constant
constexpr double kGradRel = 1e-6;        // 10: gradient vs central differences

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

ModelParams ggc_params(int K, double L) {
    ModelParams P;
    P.K = K;
    P.L = L;
    P.lambda = 0.1;
    P.kappa = 1.0;
    P.r = 10.0;
    return P;
}

ModelParams free_params(int K) {
    ModelParams P;
    P.K = K;
    P.lambda = 0.0;
    P.kappa = 0.0;
    return P;
}

StepperFactory ggc_factory(const ModelParams& P, const NoiseSpec& noise, double dt) {
    return [P, noise, dt] {
        auto st = std::make_shared<GgcStepper>(P, noise, dt);
        return StepFn([st](SpectralField& f, Stream& r) { st->step(f, r); });
    };
}

std::vector<Observable> n_and_lp4() {
    return {{"N", [](const SpectralField& f) { return l2_norm_sq(f); }},
            {"lp4", [](const SpectralField& f) { return lp_norm_p(f, 4.0); }}};
}

// ------------------------------------------------------------------ 1
Outcome conservation() {
    Outcome out{true, ""};
    for (int K : {64, 128}) {
        ModelParams P = free_params(K);
        P.lambda = 1.0;
        Stream s(kSeed, 100 + K);
        // Smooth data on the lowest modes.
        SpectralField f(K, P.L);
        for (int k = -4; k <= 4; ++k) f[k] = std::exp(-0.5 * k * k) * std::polar(0.8, 2.0 * pi * s.uniform());
        NlsStepper st(P, 1e-3);
        double N0 = l2_norm_sq(f), H0 = hamiltonian(f, P);
        double dn = 0.0, dh = 0.0;
        for (int i = 1; i <= 10000; ++i) {
            st.step(f);
            if (i % 100 == 0) {
                dn = std::max(dn, std::abs(l2_norm_sq(f) - N0) / N0);
                dh = std::max(dh, std::abs(hamiltonian(f, P) - H0) / std::abs(H0));
            }
        }
        out.pass = out.pass && dn < kNRel && dh < kHRel;
        out.detail += fmt("K=%d dN/N=%.1e dH/H=%.1e; ", K, dn, dh);
    }
    return out;
}

// ------------------------------------------------------------------ 2
Outcome free_stationarity() {
    const int K = 8;
    ModelParams P = free_params(K);
    auto noise = make_noise(P, 0.47);
    auto law = mode_law(P);
    Stream rng(kSeed, 2);
    auto f = sample_free(P, rng);
    GgcStepper st(P, noise, 0.1);
    const int n = 100000;
    std::vector<std::vector<double>> x(2 * K + 1);
    for (int i = 0; i < n; ++i) {
        st.step(f, rng);
        for (int k = -K; k <= K; ++k) x[k + K].push_back(std::norm(f[k]));
    }
    double worst = 0.0;
    for (int k = -K; k <= K; ++k) {
        double z = std::abs(mean(x[k + K]) - 2.0 / law.theta[k + K]) / batch_std_error(x[k + K], 50);
        worst = std::max(worst, z);
    }
    return {worst < kModeSigmas, fmt("%d states, max |mean - 2/theta| = %.2f std.err over |k| <= %d", n, worst, K)};
}

// ------------------------------------------------------------------ 3
Outcome ggc_invariance() {
    auto P = ggc_params(32, 2.0 * pi);
    auto noise = make_noise(P, 0.47);
    ChainConfig cc;
    cc.thin = 100;
    Stream rng(kSeed, 3);
    auto start = sample_ggc_pool(P, cc, 512, 16, rng.split(1));
    auto fresh = sample_ggc_pool(P, cc, 512, 16, rng.split(2));
    IntegratorCfg cfg;
    cfg.dt = 2.5e-3;
    cfg.n_steps = 4000;
    cfg.record_every = 4000;
    auto ens = run_ensemble([&](Stream&, int i) { return start[i]; }, ggc_factory(P, noise, cfg.dt), cfg, n_and_lp4(),
                            512, rng.split(3));
    std::vector<double> en, el, fn, fl;
    for (const auto& f : ens.final_states) {
        en.push_back(l2_norm_sq(f));
        el.push_back(lp_norm_p(f, 4.0));
    }
    for (const auto& f : fresh) {
        fn.push_back(l2_norm_sq(f));
        fl.push_back(lp_norm_p(f, 4.0));
    }
    auto kn = equilibrium_test(en, fn), kl = equilibrium_test(el, fl);
    return {kn.p_value > kKsLevel && kl.p_value > kKsLevel,
            fmt("T=10 dt=%.1e, KS p(N)=%.3f p(lp4)=%.3f", cfg.dt, kn.p_value, kl.p_value)};
}

// ------------------------------------------------------------------ 4
Outcome relaxation() {
    auto P = ggc_params(32, 2.0 * pi);
    auto noise = make_noise(P, 0.47);
    ChainConfig cc;
    cc.thin = 100;
    Stream rng(kSeed, 4);
    auto eq = sample_ggc_pool(P, cc, 2048, 16, rng.split(1));
    std::vector<double> eqn, eql;
    for (const auto& f : eq) {
        eqn.push_back(l2_norm_sq(f));
        eql.push_back(lp_norm_p(f, 4.0));
    }
    IntegratorCfg cfg;
    cfg.dt = 2.5e-3;
    cfg.n_steps = 600;
    cfg.record_every = 4;
    auto cold = run_ensemble([&](Stream&, int) { return SpectralField(P.K, P.L); }, ggc_factory(P, noise, cfg.dt),
                             cfg, n_and_lp4(), 512, rng.split(2), 1, "cold");
    // Hot: equilibrium draws with twice the mass.
    auto hot = run_ensemble(
        [&](Stream&, int i) {
            auto f = eq[1024 + i];
            f *= cplx(std::sqrt(2.0));
            return f;
        },
        ggc_factory(P, noise, cfg.dt), cfg, n_and_lp4(), 512, rng.split(3), 1, "hot");

    // The verdict uses the standard window (first point above 3 std.err until
    // the signal sinks below it). A second fit that skips three e-folds of the
    // confining contraction is reported for diagnosis only.
    double nbar = mean(eqn);
    double fast = P.beta * noise.max_sq() * P.r * P.kappa_coeff() * std::pow(nbar, P.r - 1.0);
    FitOptions late;
    late.t_start = 3.0 / fast;

    Outcome out{true, ""};
    auto show = [](const RateFit& f) {
        return fmt("%.2f [%.2f,%.2f] R2=%.3f t=%.2f-%.2f", f.rate, f.ci_lo, f.ci_hi, f.r_squared, f.t_min, f.t_max);
    };
    for (const char* name : {"N", "lp4"}) {
        const auto& ref = std::strcmp(name, "N") == 0 ? eqn : eql;
        FitOptions fo;
        fo.eq_std_error = late.eq_std_error = std::sqrt(variance(ref) / double(ref.size()));
        try {
            auto a = fit_rate(cold, name, mean(ref), fo);
            auto b = fit_rate(hot, name, mean(ref), fo);
            bool ok = a.rate > 0 && b.rate > 0 && a.r_squared > kR2 && b.r_squared > kR2 &&
                      std::max(a.ci_lo, b.ci_lo) <= std::min(a.ci_hi, b.ci_hi);
            out.pass = out.pass && ok;
            out.detail += fmt("%s cold %s, hot %s; ", name, show(a).c_str(), show(b).c_str());
        } catch (const NumericalError& e) {
            out.pass = false;
            out.detail += fmt("%s: %s; ", name, e.what());
        }
        try {
            auto c = fit_rate(cold, name, mean(ref), late);
            auto d = fit_rate(hot, name, mean(ref), late);
            out.detail += fmt("[from t=%.2f: cold %s, hot %s]; ", late.t_start, show(c).c_str(), show(d).c_str());
        } catch (const NumericalError&) {
            out.detail += fmt("[from t=%.2f: no signal]; ", late.t_start);
        }
    }
    return out;
}

// ------------------------------------------------------------------ 5
Outcome ou_rates() {
    const int K = 8;
    ModelParams P = free_params(K);
    auto noise = make_noise(P, 0.47);
    auto law = mode_law(P);
    IntegratorCfg cfg;
    cfg.dt = 0.05;
    cfg.n_steps = 120;
    cfg.record_every = 2;
    std::vector<Observable> obs;
    for (int k = 0; k <= 2; ++k) obs.push_back(mode_energy_observable(k));
    auto cold = run_ensemble([&](Stream&, int) { return SpectralField(K, P.L); }, ggc_factory(P, noise, cfg.dt), cfg,
                             obs, 1000, Stream(kSeed, 5), 1, "cold");
    Outcome out{true, ""};
    for (int k = 0; k <= 2; ++k) {
        double expect = P.beta * noise.at(k) * noise.at(k) * P.omega(k);
        auto fit = fit_rate(cold, "mode" + std::to_string(k), 2.0 / law.theta[k + K]);
        out.pass = out.pass && fit.ci_lo <= expect && expect <= fit.ci_hi;
        out.detail += fmt("k=%d %.3f in [%.3f,%.3f]? ", k, expect, fit.ci_lo, fit.ci_hi);
    }
    return out;
}

// ------------------------------------------------------------------ 6
Outcome trace_oracles() {
    ModelParams P = free_params(1);
    FreeOperatorSpec spec;
    spec.s = 0.47;
    spec.nu = {1.0 / (P.beta * P.omega(0)), 1.0 / (P.beta * P.omega(1))};
    auto rates = spec.rates();
    Outcome out{true, ""};
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.0}) {
        // Occupation numbers 0..60 on each of the four real coordinates.
        double sum = 0.0;
        for (int a = 0; a <= 60; ++a)
            for (int b = 0; b <= 60; ++b)
                for (int c = 0; c <= 60; ++c)
                    for (int d = 0; d <= 60; ++d)
                        sum += std::exp(-t * (rates[0] * (a + b) + rates[1] * (c + d)));
        worst = std::max(worst, std::abs(trace_free(t, spec) - sum) / sum);
    }
    out.pass = worst < kTraceRel;
    out.detail = fmt("occupation sum rel.err %.1e; ", worst);

    FdModel m;
    m.r = 2;
    m.s = 0.47;
    for (double t : {0.5, 1.0, 2.0}) {
        double tr = fd_trace(m, t), bd = fd_golden_thompson(m, t);
        out.pass = out.pass && bd >= tr;
        out.detail += fmt("t=%.1f trace %.4g <= bound %.4g; ", t, tr, bd);
    }
    return out;
}

// ------------------------------------------------------------------ 7
Outcome integrability() {
    Outcome out{true, ""};
    Stream rng(kSeed, 7);
    int id = 0;
    for (int K : {32, 64})
        for (double lambda : {0.1, 0.5}) {
            auto P = ggc_params(K, 1.0);
            P.lambda = lambda;
            auto a = estimate_log_partition(P, 10000, rng.split(id++));
            auto b = estimate_log_partition(P, 100000, rng.split(id++));
            bool ok = std::isfinite(a.log_z) && std::isfinite(b.log_z) && b.std_error < a.std_error;
            out.pass = out.pass && ok;
            out.detail += fmt("K=%d l=%.1f se %.4f->%.4f; ", K, lambda, a.std_error, b.std_error);
        }
    // The tau = 2 weights are heavy tailed (ESS of a few at 1e5), so one pair of
    // runs says little; compare mean jackknife errors over replicates.
    auto P = ggc_params(32, 1.0);
    auto noise = make_noise(P, 0.47);
    const int reps = 4;
    for (double tau : {1.0, 2.0}) {
        double se_small = 0.0, se_large = 0.0, ess = 0.0;
        bool ok = true;
        for (int r = 0; r < reps; ++r) {
            auto a = mc_exp_integral(tau, P, noise, 10000, rng.split(id++));
            auto b = mc_exp_integral(tau, P, noise, 100000, rng.split(id++));
            ok = ok && std::isfinite(a.log_estimate) && std::isfinite(b.log_estimate) && !b.out_of_window;
            se_small += a.log_std_error / reps;
            se_large += b.log_std_error / reps;
            ess += b.ess / reps;
        }
        ok = ok && se_large < se_small;
        out.pass = out.pass && ok;
        out.detail += fmt("tau=%.0f log se %.3f->%.3f (ess %.0f); ", tau, se_small, se_large, ess);
    }
    return out;
}

// ------------------------------------------------------------------ 8
Outcome scaling_and_sweep() {
    Outcome out{true, ""};
    Stream rng(kSeed, 8);
    int id = 0;
    for (double beta : {0.5, 2.0}) {
        auto P = ggc_params(32, 1.0);
        P.beta = beta;
        auto Q = ggc_params(32, 1.0);
        Q.lambda = P.lambda * std::pow(beta, 1.0 - P.p / 2.0);
        Q.kappa = P.kappa * std::pow(beta, 1.0 - P.r);
        // Independent streams on the two sides.
        auto a = estimate_log_partition(P, 100000, rng.split(id++));
        auto b = estimate_log_partition(Q, 100000, rng.split(id++));
        double z = std::abs(a.log_z - b.log_z) / std::hypot(a.std_error, b.std_error);
        out.pass = out.pass && z < kScalingSigmas && !a.unreliable && !b.unreliable;
        out.detail += fmt("beta=%.1f %.4f vs %.4f (%.2f se); ", beta, a.log_z, b.log_z, z);
    }
    auto P = ggc_params(32, 1.0);
    auto sw = sweep_partition(P, {0.0, 0.1, 0.2, 0.3, 0.4}, {0.5, 0.75, 1.0, 1.25, 1.5}, 20000, rng.split(id++));
    out.pass = out.pass && sw.max_curvature_ratio < kCurvature;
    out.detail += fmt("5x5 sweep max |second difference|/err %.2f", sw.max_curvature_ratio);
    return out;
}

// ------------------------------------------------------------------ 9
Outcome canonical_sphere() {
    auto P = ggc_params(16, 2.0 * pi);
    auto noise = make_noise(P, 0.47);
    Stream rng(kSeed, 9);
    const double n = 1.0;
    auto f = sample_free(P, rng);
    f *= cplx(std::sqrt(n / l2_norm_sq(f)));
    CanonicalStepper st(P, noise, 1e-3, n);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        st.step(f, rng);
        worst = std::max(worst, std::abs(l2_norm_sq(f) - n) / n);
    }
    Outcome out{worst < kSphereRel, fmt("max |N-n|/n over 1e5 steps %.1e; ", worst)};

    // Correction off, renormalization on: the pre-renormalization increment
    // measures the drift of N along a trajectory on the sphere.
    std::vector<double> c;
    for (double dt : {1e-3, 5e-4}) {
        CanonicalStepper raw(P, noise, dt, n, {false, 0.5, true});
        auto g = f;
        double dn = 0.0, tr = 0.0;
        for (int i = 0; i < 100000; ++i) {
            raw.step(g, rng);
            dn += raw.last_dN();
            tr += raw.last_trace() * dt;
        }
        c.push_back(dn / tr);
    }
    double rel = std::abs(c[0] - c[1]) / c[1];
    out.pass = out.pass && rel < kDriftStability;
    out.detail += fmt("drift constant %.4f (dt=1e-3) %.4f (dt=5e-4)", c[0], c[1]);
    return out;
}

// ------------------------------------------------------------------ 10
SpectralField random_field(Stream& s, int K, double L, double decay) {
    SpectralField f(K, L);
    for (int k = -K; k <= K; ++k) f[k] = cplx(s.normal(), s.normal()) / std::pow(1.0 + k * k, decay);
    return f;
}

Outcome inequalities() {
    Stream s(kSeed, 10);
    int viol_sup = 0, viol_lp = 0;
    for (int t = 0; t < 1000; ++t) {
        auto f = random_field(s, 16, 2.0 * pi, 0.5 + 0.5 * s.uniform());
        if (sup_norm(f, 512) > linf_bound(f, 0.4, 512) * (1 + 1e-12)) ++viol_sup;
        if (lp_norm_p(f, 4.0, 512) > interpolation_bound(f, 4.0, 512) * (1 + 1e-12)) ++viol_lp;
    }
    auto P = ggc_params(8, 2.0);
    P.r = 3.0;
    P.kappa = 0.05;
    P.lambda = 0.7;
    auto f = random_field(s, 8, P.L, 1.0);
    f *= cplx(0.4);
    auto g = gradient_energy(f, P);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        auto h = random_field(s, 8, P.L, 1.0);
        const double e = 1e-5;
        double fd = (effective_energy(f + cplx(e) * h, P) - effective_energy(f - cplx(e) * h, P)) / (2 * e);
        worst = std::max(worst, std::abs(fd - inner_re(g, h)) / std::max(1.0, std::abs(fd)));
    }
    return {viol_sup == 0 && viol_lp == 0 && worst < kGradRel,
            fmt("sup-norm violations %d/1000, interpolation violations %d/1000, gradient rel.err %.1e", viol_sup,
                viol_lp, worst)};
}

} // namespace

int main(int argc, char** argv) {
    // --expect-fail N marks criterion N as known to fail; the exit status then
    // counts only unexpected failures.
    std::vector<bool> expected(11, false);
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--expect-fail") == 0 && i + 1 < argc) {
            int n = std::atoi(argv[++i]);
            if (n >= 1 && n <= 10) expected[n] = true;
        } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: acceptance [--expect-fail N]... [--only N]\n");
            return 2;
        }
    }
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"conservation", conservation},
        {"free stationarity", free_stationarity},
        {"ggc invariance", ggc_invariance},
        {"relaxation", relaxation},
        {"ou rates", ou_rates},
        {"trace oracles", trace_oracles},
        {"integrability", integrability},
        {"scaling and sweep", scaling_and_sweep},
        {"canonical sphere", canonical_sphere},
        {"inequalities", inequalities},
    };
    int unexpected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only && static_cast<int>(i) + 1 != only) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass && !expected[i + 1]) ++unexpected;
        std::printf("%s %2zu %-18s %6.1fs  %s%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, sec,
                    o.detail.c_str(), !o.pass && expected[i + 1] ? " (expected)" : "");
        std::fflush(stdout);
    }
    return unexpected;
}

#include <doctest.h>

#include "snls/error.hpp"
#include "snls/measures.hpp"
#include "snls/stats.hpp"

#include <cmath>
#include <numbers>

using namespace snls;
using std::numbers::pi;

namespace {

ModelParams small(int K, double L, double beta) {
    ModelParams P;
    P.K = K;
    P.L = L;
    P.beta = beta;
    P.lambda = 0.0;
    P.kappa = 0.0;
    return P;
}

// One retained mode with theta = 2.
ModelParams single_mode() {
    ModelParams P = small(0, 2.0 * pi, 1.0);
    P.m = std::sqrt(2.0);
    return P;
}

std::vector<double> free_N(const ModelParams& P, int n, Stream& s) {
    std::vector<double> out(n);
    for (auto& v : out) v = l2_norm_sq(sample_free(P, s));
    return out;
}

std::vector<double> chain_N(const ChainResult& c) {
    std::vector<double> out;
    for (const auto& f : c.samples) out.push_back(l2_norm_sq(f));
    return out;
}

} // namespace

TEST_CASE("mode law") {
    auto P = small(3, 2.0 * pi, 1.0);
    auto law = mode_law(P);
    REQUIRE(law.k.size() == 7);
    CHECK(law.theta[3] == doctest::Approx(1.0));
    CHECK(law.theta[4] == doctest::Approx(2.0));
    CHECK(law.theta[2] == law.theta[4]);
    for (int i = 4; i < 7; ++i) CHECK(law.theta[i] > law.theta[i - 1]);
    P.beta = 2.0;
    auto law2 = mode_law(P);
    for (std::size_t i = 0; i < law.theta.size(); ++i) CHECK(law2.theta[i] == doctest::Approx(2.0 * law.theta[i]));
}

TEST_CASE("mode densities are normalized") {
    double s = 0.0, h = 1e-3;
    for (int i = 0; i < 40000; ++i) s += mode_sq_density((i + 0.5) * h, 3.0) * h;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    // Polar integration of the complex density.
    double t = 0.0;
    for (int i = 0; i < 20000; ++i) {
        double r = (i + 0.5) * 5e-4;
        t += 2.0 * pi * r * mode_density(cplx(r, 0.0), 3.0) * 5e-4;
    }
    CHECK(t == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("free samples: mode variances, independence, mean of N") {
    auto P = small(4, 2.0 * pi, 1.0);
    auto law = mode_law(P);
    Stream s(10, 1);
    const int n = 100000;
    std::vector<double> sq(law.k.size(), 0.0);
    std::vector<double> x0(n), x1(n), Ns(n);
    for (int i = 0; i < n; ++i) {
        auto f = sample_free(P, s);
        for (std::size_t j = 0; j < sq.size(); ++j) sq[j] += std::norm(f.data()[j]);
        x0[i] = std::norm(f[0]);
        x1[i] = std::norm(f[1]);
        Ns[i] = l2_norm_sq(f);
    }
    // theta_k * sum |X_k|^2 is chi-square with 2n degrees of freedom.
    for (std::size_t j = 0; j < sq.size(); ++j) {
        double z = (law.theta[j] * sq[j] - 2.0 * n) / std::sqrt(4.0 * n);
        CHECK(std::abs(z) < 4.0);
    }
    CHECK(std::abs(mean(x0) - 2.0) < 3.0 * std_error(x0));
    double m0 = mean(x0), m1 = mean(x1), c = 0.0;
    for (int i = 0; i < n; ++i) c += (x0[i] - m0) * (x1[i] - m1);
    c /= (n - 1) * std::sqrt(variance(x0) * variance(x1));
    CHECK(std::abs(c) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(mean(Ns) - law.mean_N()) < 3.0 * std_error(Ns));
}

TEST_CASE("characteristic product") {
    auto law = mode_law(small(8, 2.0 * pi, 1.0));
    CHECK(std::abs(char_product(0.0, 0.0, 0.1, law) - 1.0) < 1e-15);
    auto one = mode_law(std::vector<double>{2.0});
    auto F = char_product(1.0, 0.0, 0.1, one);
    CHECK(std::abs(F - 1.0 / cplx(1.0, -1.0)) < 1e-15);
    CHECK(std::abs(F) == doctest::Approx(1.0 / std::sqrt(2.0)));
    for (double xi : {0.3, 1.0, 7.0}) CHECK(std::abs(char_product(xi, 0.0, 0.1, law)) <= 1.0);
    CHECK_THROWS_AS(char_product(0.0, 0.0, 0.5, law), NumericalError);
    CHECK_THROWS_AS(char_product(0.0, 0.6, 0.1, law), NumericalError);
    CHECK_NOTHROW(char_product(0.0, 0.5, 0.1, law));
}

TEST_CASE("characteristic product decays like exp(-c sqrt(xi))") {
    auto law = mode_law(small(2000, 2.0 * pi, 1.0));
    std::vector<double> sx, ly;
    for (double xi = 25; xi <= 100; xi += 5) {
        sx.push_back(std::sqrt(xi));
        ly.push_back(std::log(std::abs(char_product(xi, 0.0, 0.1, law))));
    }
    auto fit = fit_line(sx, ly);
    double c = -fit.slope;
    CHECK(c > 0);
    CHECK(fit.r2 > 0.999);
    double d = std::log(std::abs(char_product(100.0, 0.0, 0.1, law))) -
               std::log(std::abs(char_product(25.0, 0.0, 0.1, law)));
    CHECK(d <= -0.9 * c * (std::sqrt(99.0) - std::sqrt(24.0)));
}

TEST_CASE("empirical characteristic function of N") {
    auto P = small(6, 2.0 * pi, 1.0);
    auto law = mode_law(P);
    Stream s(11, 1);
    auto Ns = free_N(P, 100000, s);
    for (double xi : {0.5, 1.0, 2.0}) {
        std::vector<double> re(Ns.size()), im(Ns.size());
        for (std::size_t i = 0; i < Ns.size(); ++i) {
            re[i] = std::cos(xi * Ns[i]);
            im[i] = std::sin(xi * Ns[i]);
        }
        auto F = char_product(xi, 0.0, 0.1, law);
        CHECK(std::abs(mean(re) - F.real()) < 4.0 * std_error(re));
        CHECK(std::abs(mean(im) - F.imag()) < 4.0 * std_error(im));
    }
}

TEST_CASE("density of N for one mode is exponential") {
    auto law = mode_law(single_mode());
    REQUIRE(law.theta.size() == 1);
    CHECK(law.theta[0] == doctest::Approx(2.0));
    NDensity rho(law);
    CHECK(rho(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-4));
    CHECK(rho(3.0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-3));
}

TEST_CASE("density of N: positivity, mass and Monte Carlo histogram") {
    auto P = small(8, 2.0 * pi, 1.0);
    auto law = mode_law(P);
    NDensity rho(law);
    CHECK(rho.residual() < 1e-6);
    for (int i = 0; i <= 400; ++i) CHECK(rho(i * rho.support_max() / 400) >= -1e-6);
    double mass = rho.integrate([](double) { return 1.0; });
    double mean_n = rho.integrate([](double x) { return x; });
    CHECK(mean_n == doctest::Approx(law.mean_N()).epsilon(1e-6));
    CHECK(std::abs(mass - 1.0) < 1e-4);

    Stream s(12, 1);
    const int n = 100000;
    auto Ns = free_N(P, n, s);
    const double w = 0.5;
    double worst = 0.0;
    for (int b = 0; b < 40; ++b) {
        double lo = b * w, hi = lo + w;
        double cnt = 0;
        for (double v : Ns) cnt += (v >= lo && v < hi);
        double pb = 0.0;
        for (int i = 0; i <= 16; ++i) pb += (i == 0 || i == 16 ? 1.0 : (i % 2 ? 4.0 : 2.0)) * rho(lo + i * w / 16);
        pb *= w / 48.0;
        double se = std::sqrt(std::max(pb * (1 - pb), 1e-12) / n);
        worst = std::max(worst, std::abs(cnt / n - pb) / se);
    }
    CHECK(worst < 5.0);
}

TEST_CASE("fejer kernel") {
    for (double t : {-3.0, -1.0, 0.0, 0.5, 3.1}) CHECK(fejer_kernel(t, 1) == doctest::Approx(1.0));
    CHECK(fejer_kernel(4.0, 1) == 0.0);
    for (int l : {1, 4, 64}) CHECK(fejer_kernel(0.0, l) == doctest::Approx(double(l)));
    CHECK(fejer_kernel(0.7, 8) == doctest::Approx(fejer_kernel(-0.7, 8)));
    // Composite Simpson on a fine grid.
    int n = 20000;
    double h = 2 * pi / n, s = 0.0;
    for (int i = 0; i <= n; ++i) {
        double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += wgt * fejer_kernel(-pi + i * h, 8);
    }
    CHECK(std::abs(s * h / 3.0 - 2.0 * pi) < 1e-8);
    CHECK(log_fejer_kernel(0.3, 8) == doctest::Approx(std::log(fejer_kernel(0.3, 8))));
    CHECK(std::isinf(log_fejer_kernel(5.0, 8)));
}

TEST_CASE("fejer order one reproduces the reference measure") {
    // At beta = 4, L = 1 the law of N sits well inside the kernel support around n = pi.
    auto P = small(8, 1.0, 4.0);
    ChainConfig cfg;
    cfg.burn_in = 500;
    cfg.thin = 5;
    Stream s(13, 1), t(13, 2);
    auto c = sample_conditioned(pi, 1, P, cfg, 3000, s);
    auto ref = free_N(P, 3000, t);
    CHECK(ks_two_sample(chain_N(c), ref).p_value > 0.01);
}

TEST_CASE("fejer conditioning concentrates N") {
    auto P = small(8, 2.0 * pi, 1.0);
    double n = mode_law(P).mean_N();
    ChainConfig cfg;
    cfg.thin = 20;
    Stream s(14, 1);
    auto c64 = sample_conditioned(n, 64, P, cfg, 2000, s);
    auto c4 = sample_conditioned(n, 4, P, cfg, 2000, s);
    auto N64 = chain_N(c64), N4 = chain_N(c4);
    CHECK(std::abs(mean(N64) - n) < 0.02 * n);
    CHECK(std::sqrt(variance(N64)) < std::sqrt(variance(N4)));
    auto c16 = sample_conditioned(n, 16, P, cfg, 2000, s);
    auto N16 = chain_N(c16);
    CHECK(std::sqrt(variance(N64)) < std::sqrt(variance(N16)));
    CHECK(std::sqrt(variance(N16)) < std::sqrt(variance(N4)));
    CHECK_THROWS_AS(sample_conditioned(n, 0, P, cfg, 10, s), ConfigError);
}

TEST_CASE("disintegration over n recovers the reference measure") {
    auto P = small(6, 2.0 * pi, 1.0);
    ChainConfig cfg;
    cfg.thin = 20;
    Stream s(15, 1), t(15, 2);
    std::vector<double> mixN, mixL4, refN, refL4;
    for (int i = 0; i < 200; ++i) {
        double n = l2_norm_sq(sample_free(P, t)); // n ~ rho_N
        Stream cs = s.split(i);
        auto c = sample_conditioned(n, 64, P, cfg, 5, cs);
        for (const auto& f : c.samples) {
            mixN.push_back(l2_norm_sq(f));
            mixL4.push_back(lp_norm_p(f, 4.0));
        }
    }
    for (int i = 0; i < 1000; ++i) {
        auto f = sample_free(P, t);
        refN.push_back(l2_norm_sq(f));
        refL4.push_back(lp_norm_p(f, 4.0));
    }
    CHECK(ks_two_sample(mixN, refN).p_value > 0.01);
    CHECK(ks_two_sample(mixL4, refL4).p_value > 0.01);
}

TEST_CASE("ggc log weight") {
    auto P = small(6, 1.5, 1.3);
    Stream s0(1, 1);
    CHECK(ggc_log_weight(sample_free(P, s0), P) == 0.0);
    P.lambda = 0.4;
    P.kappa = 0.2;
    P.r = 3;
    CHECK(ggc_log_weight(SpectralField(6, 1.5), P) == 0.0);
    Stream s(16, 1);
    for (int i = 0; i < 20; ++i) {
        auto f = sample_free(P, s);
        // Effective energy minus its Gaussian part.
        double gauss = kinetic(f) + 0.5 * P.m * P.m * l2_norm_sq(f);
        double expect = -P.beta * (effective_energy(f, P) - gauss);
        CHECK(std::abs(ggc_log_weight(f, P) - expect) < 1e-10 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("ggc chain: constant weight and single-mode tilt") {
    auto P = single_mode();
    ChainConfig cfg;
    cfg.adapt = false;
    Stream s(17, 1);
    auto c = sample_ggc(P, cfg, 200, s);
    CHECK(c.acceptance == 1.0);

    P.kappa = 1.0;
    P.r = 1.0;
    cfg.adapt = true;
    cfg.thin = 10;
    auto t = sample_ggc(P, cfg, 20000, s);
    auto Ns = chain_N(t);
    // N is exponential with rate theta/2 + beta kappa = 2.
    CHECK(std::abs(mean(Ns) - 0.5) < 3.0 * batch_std_error(Ns));

    ModelParams Q = P;
    Q.lambda = 0.1;
    Q.kappa = 0.0;
    CHECK_THROWS_AS(sample_ggc(Q, cfg, 10, s), ConfigError);
    Q.kappa = 1.0;
    Q.p = 6.0;
    CHECK_THROWS_AS(sample_ggc(Q, cfg, 10, s), ConfigError);
}

TEST_CASE("ggc chain is stable across seeds") {
    auto P = small(32, 2.0 * pi, 1.0);
    P.lambda = 0.1;
    P.kappa = 1.0;
    P.r = 10;
    ChainConfig cfg;
    cfg.thin = 10;
    Stream a(18, 1), b(18, 2);
    auto ca = sample_ggc(P, cfg, 1500, a);
    auto cb = sample_ggc(P, cfg, 1500, b);
    std::vector<double> la, lb;
    for (const auto& f : ca.samples) la.push_back(lp_norm_p(f, 4.0));
    for (const auto& f : cb.samples) lb.push_back(lp_norm_p(f, 4.0));
    double ea = batch_std_error(la, 30), eb = batch_std_error(lb, 30);
    CHECK(std::abs(mean(la) - mean(lb)) < 3.0 * std::hypot(ea, eb));
    CHECK(ca.acceptance > 0.05);
    // Same seed, same chain.
    Stream a2(18, 1);
    auto ca2 = sample_ggc(P, cfg, 20, a2);
    CHECK(ca2.samples[19].data() == ca.samples[19].data());
}

TEST_CASE("partition function estimates") {
    Stream s(19, 1);
    auto P = single_mode();
    auto z0 = estimate_log_partition(P, 1000, s);
    CHECK(z0.log_z == 0.0);
    CHECK(z0.std_error == 0.0);

    P.kappa = 1.0;
    P.r = 1.0;
    auto z = estimate_log_partition(P, 100000, s);
    CHECK(std::abs(z.log_z - std::log(0.5)) < 3.0 * z.std_error);
    CHECK(log_partition_quadrature(P) == doctest::Approx(std::log(0.5)).epsilon(1e-5));
    CHECK_FALSE(z.unreliable);

    // Common random numbers make the estimate monotone in kappa.
    auto Q = small(6, 2.0 * pi, 1.0);
    Q.r = 2.0;
    double prev = 1.0;
    for (double k : {0.05, 0.1, 0.2, 0.4}) {
        Q.kappa = k;
        double v = estimate_log_partition(Q, 5000, s).log_z;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("scaling identity of the partition function") {
    auto A = small(4, 2.0 * pi, 2.0);
    A.kappa = 1.0;
    A.r = 2.0;
    auto B = small(4, 2.0 * pi, 1.0);
    B.kappa = 0.5;
    B.r = 2.0;
    Stream s(20, 1);
    auto za = estimate_log_partition(A, 100000, s.split(1));
    auto zb = estimate_log_partition(B, 100000, s.split(2));
    CHECK(std::abs(za.log_z - zb.log_z) < 3.0 * std::hypot(za.std_error, zb.std_error));
    CHECK(log_partition_quadrature(A) == doctest::Approx(log_partition_quadrature(B)).epsilon(1e-6));
}

TEST_CASE("partition sweep is smooth and matches quadrature at lambda = 0") {
    auto P = small(8, 1.0, 1.0);
    P.r = 2.0;
    std::vector<double> lambdas{0.0, 0.025, 0.05, 0.075, 0.1};
    std::vector<double> kappas{0.5, 0.75, 1.0, 1.25, 1.5};
    Stream s(21, 1);
    auto sw = sweep_partition(P, lambdas, kappas, 20000, s);
    CHECK(sw.max_curvature_ratio < 10.0);
    for (std::size_t j = 0; j < kappas.size(); ++j) {
        ModelParams Q = P;
        Q.kappa = kappas[j];
        const auto& e = sw.grid[0][j];
        CHECK(std::abs(e.log_z - log_partition_quadrature(Q)) < 3.0 * e.std_error);
    }
}

TEST_CASE("importance-sampling error shrinks with sample size") {
    auto P = small(8, 1.0, 1.0);
    P.lambda = 0.1;
    P.kappa = 1e-4;
    P.r = 10.0;
    Stream s(22, 1);
    auto a = estimate_log_partition(P, 10000, s.split(1));
    auto b = estimate_log_partition(P, 100000, s.split(2));
    REQUIRE(std::isfinite(a.std_error));
    REQUIRE(std::isfinite(b.std_error));
    double ratio = a.std_error / b.std_error;
    CHECK(ratio > 1.5);
    CHECK(ratio < 6.0);
    CHECK(std::abs(a.log_z - b.log_z) < 4.0 * std::hypot(a.std_error, b.std_error));
}

#include "snls/stats.hpp"

#include "snls/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace snls {

double mean(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

double variance(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    double mu = mean(x), s = 0.0;
    for (double v : x) s += (v - mu) * (v - mu);
    return s / double(x.size() - 1);
}

double std_error(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    return std::sqrt(variance(x) / double(x.size()));
}

double batch_std_error(const std::vector<double>& x, int nb) {
    std::size_t len = x.size() / std::size_t(nb);
    if (len == 0) return std_error(x);
    std::vector<double> b(nb);
    for (int i = 0; i < nb; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < len; ++j) s += x[i * len + j];
        b[i] = s / double(len);
    }
    return std_error(b);
}

double integrated_autocorr_time(const std::vector<double>& x) {
    std::size_t n = x.size();
    if (n < 4) return 1.0;
    double mu = mean(x);
    double c0 = 0.0;
    for (double v : x) c0 += (v - mu) * (v - mu);
    c0 /= double(n);
    if (c0 == 0.0) return 1.0;
    double tau = 1.0;
    for (std::size_t t = 1; t < n / 2; ++t) {
        double c = 0.0;
        for (std::size_t i = 0; i + t < n; ++i) c += (x[i] - mu) * (x[i + t] - mu);
        c /= double(n) * c0;
        tau += 2.0 * c;
        if (double(t) >= 5.0 * tau) break;
    }
    return std::max(tau, 1.0);
}

LogMeanExp log_mean_exp(const std::vector<double>& w) {
    LogMeanExp r;
    std::size_t n = w.size();
    if (n == 0) return r;
    double wmax = *std::max_element(w.begin(), w.end());
    if (!std::isfinite(wmax))
        throw NumericalError(FaultKind::Domain, "log-weights must be finite");
    std::vector<double> x(n);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::exp(w[i] - wmax);
        s += x[i];
        s2 += x[i] * x[i];
    }
    r.value = wmax + std::log(s / double(n));
    r.ess = s * s / s2;
    if (n < 2) return r;
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        double rest = std::max(s - x[i], 1e-300);
        loo[i] = std::log(rest / double(n - 1));
    }
    double mu = mean(loo), v = 0.0;
    for (double l : loo) v += (l - mu) * (l - mu);
    r.std_error = std::sqrt(double(n - 1) / double(n) * v);
    return r;
}

double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.2) return 1.0;
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
        double term = std::exp(-2.0 * j * j * x * x);
        s += (j % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    KsResult r;
    if (a.empty() || b.empty()) return r;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double na = double(a.size()), nb = double(b.size()), d = 0.0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    r.statistic = d;
    r.n_eff = na * nb / (na + nb);
    double sq = std::sqrt(r.n_eff);
    r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
    return r;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
    std::size_t n = x.size();
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double wi = w.empty() ? 1.0 : w[i];
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
    }
    LineFit f;
    if (n < 2 || sw <= 0) return f;
    double mx = sx / sw, my = sy / sw, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double wi = w.empty() ? 1.0 : w[i];
        sxx += wi * (x[i] - mx) * (x[i] - mx);
        sxy += wi * (x[i] - mx) * (y[i] - my);
        syy += wi * (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

double quantile(std::vector<double> x, double q) {
    if (x.empty()) return 0.0;
    std::sort(x.begin(), x.end());
    double pos = q * double(x.size() - 1);
    auto lo = std::size_t(std::floor(pos));
    auto hi = std::min(lo + 1, x.size() - 1);
    double t = pos - double(lo);
    return x[lo] * (1 - t) + x[hi] * t;
}

} // namespace snls

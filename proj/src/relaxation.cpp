#include "snls/relaxation.hpp"

#include "snls/error.hpp"
#include "snls/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace snls {

int EnsembleStats::index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return int(i);
    throw ConfigError("observable", "unknown observable " + name);
}

void summarize(EnsembleStats& st) {
    std::size_t nobs = st.series.size();
    st.mean.assign(nobs, {});
    st.std_error.assign(nobs, {});
    for (std::size_t j = 0; j < nobs; ++j) {
        std::size_t T = st.times.size();
        std::vector<double> col(st.series[j].size());
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i < col.size(); ++i) col[i] = st.series[j][i][t];
            st.mean[j].push_back(mean(col));
            st.std_error[j].push_back(std_error(col));
        }
    }
}

EnsembleStats run_ensemble(const InitSampler& init, const StepperFactory& stepper, const IntegratorCfg& cfg,
                           const std::vector<Observable>& obs, int M, const Stream& rng, int workers,
                           const std::string& init_descr) {
    if (M < 100) throw ConfigError("relax.M", "ensembles need at least 100 trajectories");
    cfg.validate();
    std::vector<Trajectory> trs(M);
    parallel_for(M, workers, [&](int i) {
        Stream s = rng.split(std::uint64_t(i));
        SpectralField f0 = init(s, i);
        StepFn step = stepper();
        trs[i] = trajectory(f0, step, cfg, obs, s);
    });
    EnsembleStats st;
    st.M = M;
    st.init_descr = init_descr;
    st.times = trs[0].t;
    st.names = trs[0].names;
    st.series.assign(obs.size(), std::vector<std::vector<double>>(M));
    for (int i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < obs.size(); ++j) st.series[j][i] = std::move(trs[i].values[j]);
        st.final_states.push_back(std::move(trs[i].final_state));
    }
    summarize(st);
    return st;
}

namespace {

struct Window {
    std::size_t lo = 0, hi = 0; // [lo, hi)
};

Window choose_window(const std::vector<double>& t, const std::vector<double>& sig, const std::vector<double>& se,
                     const FitOptions& opt) {
    double peak = 0.0;
    for (double v : sig) peak = std::max(peak, std::abs(v));
    Window w;
    std::size_t n = sig.size();
    while (w.lo < n && t[w.lo] < opt.t_start) ++w.lo;
    while (w.lo < n && std::abs(sig[w.lo]) > opt.start_fraction * peak * (1.0 + 1e-12)) ++w.lo;
    while (w.lo < n && !(std::abs(sig[w.lo]) > opt.noise_factor * se[w.lo])) ++w.lo;
    w.hi = w.lo;
    double sign = w.lo < n ? (sig[w.lo] > 0 ? 1.0 : -1.0) : 1.0;
    while (w.hi < n && sign * sig[w.hi] > opt.noise_factor * se[w.hi]) ++w.hi;
    return w;
}

LineFit fit_window(const std::vector<double>& t, const std::vector<double>& sig, const std::vector<double>& se,
                   Window w) {
    std::vector<double> x, y, wt;
    for (std::size_t i = w.lo; i < w.hi; ++i) {
        double a = std::abs(sig[i]);
        if (!(a > 0)) continue;
        x.push_back(t[i]);
        y.push_back(std::log(a));
        double rel = se[i] / a;
        wt.push_back(rel > 0 ? 1.0 / (rel * rel) : 1.0);
    }
    return fit_line(x, y, wt);
}

} // namespace

RateFit fit_rate(const EnsembleStats& st, const std::string& observable, double eq, FitOptions opt) {
    int j = st.index(observable);
    const auto& mu = st.mean[j];
    std::size_t T = st.times.size();
    std::vector<double> sig(T), se(T);
    for (std::size_t t = 0; t < T; ++t) {
        sig[t] = mu[t] - eq;
        se[t] = std::sqrt(st.std_error[j][t] * st.std_error[j][t] + opt.eq_std_error * opt.eq_std_error);
    }
    Window w = choose_window(st.times, sig, se, opt);
    if (int(w.hi - w.lo) < opt.min_points)
        throw NumericalError(FaultKind::InsufficientSignal,
                             "no window with " + std::to_string(opt.min_points) + " points above noise for " +
                                 observable);
    LineFit lf = fit_window(st.times, sig, se, w);
    RateFit out;
    out.rate = -lf.slope;
    out.r_squared = lf.r2;
    out.t_min = st.times[w.lo];
    out.t_max = st.times[w.hi - 1];
    out.points = int(w.hi - w.lo);

    const auto& ser = st.series[j];
    int M = int(ser.size());
    Stream rng(opt.seed, 0x5eed);
    std::vector<double> rates;
    std::vector<double> bm(T);
    for (int b = 0; b < opt.bootstrap; ++b) {
        std::fill(bm.begin(), bm.end(), 0.0);
        for (int i = 0; i < M; ++i) {
            const auto& row = ser[rng() % std::uint64_t(M)];
            for (std::size_t t = 0; t < T; ++t) bm[t] += row[t];
        }
        double eqb = eq + opt.eq_std_error * rng.normal();
        std::vector<double> sb(T);
        for (std::size_t t = 0; t < T; ++t) sb[t] = bm[t] / M - eqb;
        rates.push_back(-fit_window(st.times, sb, se, w).slope);
    }
    out.ci_lo = std::min(quantile(rates, 0.025), out.rate);
    out.ci_hi = std::max(quantile(rates, 0.975), out.rate);
    return out;
}

EquilibriumTest equilibrium_test(const std::vector<double>& a, const std::vector<double>& b) {
    EquilibriumTest r;
    auto ks = ks_two_sample(a, b);
    r.statistic = ks.statistic;
    r.p_value = ks.p_value;
    r.power_warning = a.size() < 50 || b.size() < 50;
    return r;
}

} // namespace snls

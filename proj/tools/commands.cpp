#include "commands.hpp"

#include "verify.hpp"

#include "snls/error.hpp"
#include "snls/io.hpp"
#include "snls/operators.hpp"
#include "snls/relaxation.hpp"
#include "snls/stats.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace snls::cli {

namespace {

namespace fs = std::filesystem;

// CSV writer with round-trip precision and no locale dependence.
class Csv {
public:
    Csv(RunRecord& rec, const std::string& name, const std::vector<std::string>& header)
        : out_(rec.out_dir / name) {
        if (!out_) throw NumericalError(FaultKind::Io, "cannot write " + (rec.out_dir / name).string());
        rec.outputs.push_back(name);
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }
    Csv& num(double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return cell(buf);
    }
    Csv& cell(const std::string& s) {
        out_ << (first_ ? "" : ",") << s;
        first_ = false;
        return *this;
    }
    void end() {
        out_ << "\n";
        first_ = true;
    }

private:
    std::ofstream out_;
    bool first_ = true;
};

Stream master_stream(const json& cfg) { return Stream(cfg.at("seed").get<std::uint64_t>(), 0); }
int workers(const json& cfg) { return std::max(1, cfg.at("workers").get<int>()); }
bool overridden(const json& cfg) { return cfg.at("override").get<bool>(); }

NoiseSpec noise_of(const json& cfg, const ModelParams& P) {
    return make_noise(P, cfg.at("noise").at("s").get<double>(), overridden(cfg));
}

void write_fields(RunRecord& rec, const std::string& name, const std::vector<SpectralField>& fs, int M) {
    write_records((rec.out_dir / name).string(), fs, M);
    rec.outputs.push_back(name);
}

void cmd_sample(RunRecord& rec) {
    const json& cfg = rec.config;
    auto P = model_params(cfg);
    const json& sc = cfg.at("sample");
    auto kind = sc.at("kind").get<std::string>();
    int count = sc.at("count").get<int>();
    if (count < 1) throw ConfigError("sample.count", "must be at least 1");
    auto master = master_stream(cfg);

    std::vector<SpectralField> fs;
    if (kind == "free") {
        for (int i = 0; i < count; ++i) {
            auto s = master.split(i);
            fs.push_back(sample_free(P, s));
        }
    } else if (kind == "canonical") {
        auto s = master.split(0);
        auto res = sample_conditioned(sc.at("n").get<double>(), sc.at("fejer_order").get<int>(), P, chain_cfg(cfg),
                                      count, s);
        rec.diagnostics["acceptance"] = res.acceptance;
        rec.diagnostics["rho"] = res.rho;
        fs = std::move(res.samples);
    } else if (kind == "ggc") {
        fs = sample_ggc_pool(P, chain_cfg(cfg), count, cfg.at("chain").at("chains").get<int>(), master, workers(cfg));
    } else {
        throw ConfigError("sample.kind", "one of free, canonical, ggc");
    }

    write_fields(rec, "samples.bin", fs, P.dealias_grid());
    Csv csv(rec, "N.csv", {"index", "N"});
    std::vector<double> n;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        n.push_back(l2_norm_sq(fs[i]));
        csv.num(double(i)).num(n.back()).end();
    }
    rec.diagnostics["mean_N"] = mean(n);
    if (kind == "free") rec.diagnostics["expected_mean_N"] = mode_law(P).mean_N();
}

void cmd_evolve(RunRecord& rec) {
    const json& cfg = rec.config;
    auto P = model_params(cfg);
    const json& ec = cfg.at("evolve");
    auto dyn = ec.at("dynamics").get<std::string>();
    auto init = ec.at("init").get<std::string>();
    auto icfg = integrator_cfg(cfg);
    auto master = master_stream(cfg);
    double n = ec.at("n").get<double>();

    // auto: a free draw, except that the weighted dynamics start from a
    // weighted draw (a free draw at r = 10 sits far up the confining wall).
    if (init == "auto") init = dyn == "ggc_sde" ? "ggc" : "free";
    SpectralField f0;
    auto s0 = master.split(0);
    if (init == "free") {
        f0 = sample_free(P, s0);
    } else if (init == "ggc") {
        f0 = sample_ggc(P, chain_cfg(cfg), 1, s0).samples.at(0);
    } else if (init == "zero") {
        f0 = SpectralField(P.K, P.L);
    } else {
        throw ConfigError("evolve.init", "one of auto, free, ggc, zero");
    }

    StepFn step;
    if (dyn == "nls") {
        auto st = std::make_shared<NlsStepper>(P, icfg.dt);
        step = [st](SpectralField& f, Stream&) { st->step(f); };
    } else if (dyn == "ggc_sde") {
        auto st = std::make_shared<GgcStepper>(P, noise_of(cfg, P), icfg.dt, icfg.scheme);
        step = [st](SpectralField& f, Stream& r) { st->step(f, r); };
    } else if (dyn == "canonical_sde") {
        if (!(n > 0)) throw ConfigError("evolve.n", "must be positive");
        double n0 = l2_norm_sq(f0);
        if (!(n0 > 0)) throw ConfigError("evolve.init", "canonical dynamics needs a nonzero initial field");
        f0 *= cplx(std::sqrt(n / n0));
        CanonicalStepper::Options opt;
        opt.correction = ec.at("correction").get<bool>();
        auto st = std::make_shared<CanonicalStepper>(P, noise_of(cfg, P), icfg.dt, n, opt);
        step = [st](SpectralField& f, Stream& r) { st->step(f, r); };
    } else {
        throw ConfigError("evolve.dynamics", "one of nls, ggc_sde, canonical_sde");
    }

    auto s1 = master.split(1);
    auto tr = trajectory(f0, step, icfg, standard_observables(P, ec.at("gamma").get<double>()), s1);

    std::vector<std::string> header{"t"};
    header.insert(header.end(), tr.names.begin(), tr.names.end());
    Csv csv(rec, "trajectory.csv", header);
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        csv.num(tr.t[i]);
        for (const auto& col : tr.values) csv.num(col[i]);
        csv.end();
    }
    write_fields(rec, "final.bin", {tr.final_state}, P.dealias_grid());

    const auto& N = tr.values[0];
    double drift = 0.0;
    for (double x : N) drift = std::max(drift, std::abs(x - N[0]) / N[0]);
    rec.diagnostics["max_rel_N_change"] = drift;
    // Mass is an invariant of the Hamiltonian flow and of the renormalized
    // canonical flow.
    double limit = dyn == "nls" ? 1e-12 : dyn == "canonical_sde" ? 1e-14 : -1.0;
    if (limit > 0) {
        rec.diagnostics["N_tolerance"] = limit;
        if (!(drift <= limit)) rec.status = 1;
    }
}

void cmd_verify(RunRecord& rec) {
    auto suite = rec.config.at("verify").at("suite").get<std::string>();
    auto rows = run_suite(suite, rec.config);
    Csv csv(rec, "report.csv", {"name", "statistic", "threshold", "pass"});
    int failed = 0;
    for (const auto& r : rows) {
        csv.cell(r.name).num(r.statistic).num(r.threshold).cell(r.pass ? "true" : "false").end();
        std::printf("%-28s %-4s statistic %.6g %s %.6g\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.statistic,
                    r.at_least ? ">=" : "<=", r.threshold);
        if (!r.pass) ++failed;
    }
    rec.diagnostics["rows"] = rows.size();
    rec.diagnostics["registered"] = suite_invariants(suite).size();
    rec.diagnostics["failed"] = failed;
    if (failed) rec.status = 1;
}

void cmd_sweep(RunRecord& rec) {
    const json& cfg = rec.config;
    auto P = model_params(cfg);
    const json& sw = cfg.at("sweep");
    auto lambdas = sw.at("lambdas").get<std::vector<double>>();
    auto kappas = sw.at("kappas").get<std::vector<double>>();
    auto res = sweep_partition(P, lambdas, kappas, sw.at("samples").get<int>(), master_stream(cfg), workers(cfg));
    Csv csv(rec, "sweep.csv", {"lambda", "kappa", "log_z", "std_error", "ess", "unreliable"});
    for (std::size_t i = 0; i < res.lambdas.size(); ++i)
        for (std::size_t j = 0; j < res.kappas.size(); ++j) {
            const auto& e = res.grid[i][j];
            csv.num(res.lambdas[i]).num(res.kappas[j]).num(e.log_z).num(e.std_error).num(e.ess);
            csv.cell(e.unreliable ? "true" : "false").end();
        }
    rec.diagnostics["max_curvature_ratio"] = res.max_curvature_ratio;
}

void cmd_relax(RunRecord& rec) {
    const json& cfg = rec.config;
    auto P = model_params(cfg);
    auto noise = noise_of(cfg, P);
    const json& rc = cfg.at("relax");
    int M = rc.at("M").get<int>();
    int n_eq = rc.at("equilibrium_samples").get<int>();
    if (M < 2) throw ConfigError("relax.M", "must be at least 2");
    if (n_eq < M + 2) throw ConfigError("relax.equilibrium_samples", "must exceed relax.M by at least 2");
    auto icfg = integrator_cfg(cfg, "relax");
    auto master = master_stream(cfg);

    // The first n_eq - M draws estimate the equilibrium values; the last M
    // seed the hot ensemble.
    auto eq = sample_ggc_pool(P, chain_cfg(cfg), n_eq, cfg.at("chain").at("chains").get<int>(), master.split(0),
                              workers(cfg));
    int n_ref = n_eq - M;
    double hot = rc.at("hot_factor").get<double>();
    std::vector<Observable> obs{standard_observables(P)[0], standard_observables(P)[2]};
    StepperFactory factory = [&]() -> StepFn {
        auto st = std::make_shared<GgcStepper>(P, noise, icfg.dt);
        return [st](SpectralField& f, Stream& r) { st->step(f, r); };
    };
    auto cold = run_ensemble([&](Stream&, int) { return SpectralField(P.K, P.L); }, factory, icfg, obs, M,
                             master.split(1), workers(cfg), "cold");
    auto warm = run_ensemble(
        [&](Stream&, int i) {
            auto f = eq[n_ref + i];
            f *= cplx(hot);
            return f;
        },
        factory, icfg, obs, M, master.split(2), workers(cfg), "hot");

    Csv curves(rec, "relax_curves.csv", {"init", "t", "N", "N_se", "lp4", "lp4_se"});
    for (const auto* st : {&cold, &warm})
        for (std::size_t i = 0; i < st->times.size(); ++i)
            curves.cell(st->init_descr).num(st->times[i]).num(st->mean[0][i]).num(st->std_error[0][i])
                .num(st->mean[1][i]).num(st->std_error[1][i]).end();

    Csv csv(rec, "relax.csv",
            {"observable", "init", "equilibrium", "rate", "ci_lo", "ci_hi", "r_squared", "t_min", "t_max", "points"});
    bool consistent = true;
    for (std::size_t j = 0; j < obs.size(); ++j) {
        std::vector<double> ref;
        for (int i = 0; i < n_ref; ++i) ref.push_back(obs[j].fn(eq[i]));
        FitOptions fo;
        fo.t_start = rc.at("t_start").get<double>();
        fo.noise_factor = rc.at("noise_factor").get<double>();
        fo.bootstrap = rc.at("bootstrap").get<int>();
        fo.eq_std_error = std_error(ref);
        std::vector<RateFit> fits;
        for (const auto* st : {&cold, &warm}) {
            auto fit = fit_rate(*st, obs[j].name, mean(ref), fo);
            csv.cell(obs[j].name).cell(st->init_descr).num(mean(ref)).num(fit.rate).num(fit.ci_lo).num(fit.ci_hi)
                .num(fit.r_squared).num(fit.t_min).num(fit.t_max).num(fit.points).end();
            fits.push_back(fit);
        }
        consistent = consistent && std::max(fits[0].ci_lo, fits[1].ci_lo) <= std::min(fits[0].ci_hi, fits[1].ci_hi);
    }
    rec.diagnostics["cold_hot_intervals_overlap"] = consistent;
}

void cmd_fdm(RunRecord& rec) {
    const json& cfg = rec.config;
    auto m = fd_model(cfg);
    const json& fc = cfg.at("fdm");
    int levels = fc.at("levels").get<int>();
    auto spec = fd_spectrum(m);
    Csv sp(rec, "spectrum.csv", {"level", "eigenvalue"});
    for (int i = 0; i < std::min<int>(levels, int(spec.size())); ++i) sp.num(i).num(spec[i]).end();

    auto gap = fd_gap(m);
    rec.diagnostics["E0"] = gap.E0;
    rec.diagnostics["E1"] = gap.E1;
    rec.diagnostics["gap"] = gap.gap;
    bool ok = gap.gap > 0;

    Csv tr(rec, "trace.csv", {"t", "trace", "golden_thompson", "trace_free", "dominated"});
    for (double t : fc.at("t").get<std::vector<double>>()) {
        double a = fd_trace(m, t), b = fd_golden_thompson(m, t);
        tr.num(t).num(a).num(b).num(fd_trace_free(m, t)).cell(b >= a ? "true" : "false").end();
        ok = ok && b >= a;
    }
    if (!ok) rec.status = 1;
}

} // namespace

void validate_for(RunRecord& rec) {
    check_preconditions(rec.config, rec.command);
    auto v = window_violations(rec.config, rec.command);
    if (v.empty()) return;
    if (!overridden(rec.config)) {
        std::string msg = v.front();
        for (std::size_t i = 1; i < v.size(); ++i) msg += "; " + v[i];
        throw ConfigError("override", msg + " (set override=true to run anyway)");
    }
    rec.overrides = v;
}

void run_command(RunRecord& rec) {
    fs::create_directories(rec.out_dir);
    rec.outputs.clear();
    rec.diagnostics = json::object();
    rec.status = 0;
    if (rec.command == "sample") cmd_sample(rec);
    else if (rec.command == "evolve") cmd_evolve(rec);
    else if (rec.command == "verify") cmd_verify(rec);
    else if (rec.command == "sweep") cmd_sweep(rec);
    else if (rec.command == "relax") cmd_relax(rec);
    else if (rec.command == "fdm") cmd_fdm(rec);
    else throw ConfigError("command", "unknown command " + rec.command);
}

} // namespace snls::cli

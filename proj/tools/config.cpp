#include "config.hpp"

#include "snls/error.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace snls::cli {

json default_config() {
    return json::parse(R"({
  "seed": 1,
  "workers": 1,
  "output_dir": "snls_out",
  "override": false,
  "model": {"K": 128, "L": 6.283185307179586, "m": 1.0, "beta": 1.0, "lambda": 0.1,
            "p": 4.0, "kappa": 1.0, "r": 10.0, "kappa_form": "power"},
  "noise": {"s": 0.47},
  "integrator": {"dt": 0.001, "scheme": "strang", "steps": 1000, "record_every": 10},
  "chain": {"burn_in": 2000, "thin": 50, "rho": 0.3, "adapt": true, "target_accept": 0.25,
            "proposal": "pcn", "chains": 4},
  "sample": {"kind": "free", "count": 1000, "n": 1.0, "fejer_order": 64},
  "evolve": {"dynamics": "nls", "init": "auto", "n": 1.0, "correction": true, "gamma": 0.1},
  "verify": {"suite": "field", "tolerances": {}},
  "sweep": {"lambdas": [0.0, 0.05, 0.1, 0.15, 0.2], "kappas": [0.5, 0.75, 1.0, 1.25, 1.5],
            "samples": 20000},
  "relax": {"M": 512, "T": 1.5, "dt": 0.0025, "record_every": 4, "hot_factor": 1.4142135623730951,
            "equilibrium_samples": 2048, "t_start": 0.0, "noise_factor": 3.0, "bootstrap": 400},
  "fdm": {"n_modes": 1, "nu": [1.0], "s": 0.47, "r": 2, "g": 1.0, "quartic": 0.0, "cut": 40,
          "method": "auto", "levels": 10, "t": [0.5, 1.0, 2.0]}
})");
}

namespace {

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return !(a.is_number_integer() || a.is_number_unsigned()) || b.is_number_integer() || b.is_number_unsigned();
    return a.type() == b.type();
}

// Overlays `src` onto `dst`, refusing keys and types the defaults do not know.
// Sections whose default is an empty object (tolerances) accept any keys.
void overlay(json& dst, const json& src, const std::string& where) {
    for (auto it = src.begin(); it != src.end(); ++it) {
        std::string key = join(where, it.key());
        if (!dst.contains(it.key())) {
            if (dst.is_object() && dst.empty() && where.size()) {
                dst[it.key()] = it.value();
                continue;
            }
            throw ConfigError(key, "unknown key");
        }
        json& d = dst[it.key()];
        if (d.is_object()) {
            if (!it.value().is_object()) throw ConfigError(key, "expected a section");
            if (d.empty()) {
                for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
                    if (!jt.value().is_number()) throw ConfigError(join(key, jt.key()), "expected a number");
                    d[jt.key()] = jt.value();
                }
            } else {
                overlay(d, it.value(), key);
            }
            continue;
        }
        if (!same_kind(d, it.value())) throw ConfigError(key, "expected " + std::string(d.type_name()));
        d = it.value();
    }
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace

void apply_set(json& cfg, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "expected key=value");
    std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    // Build the nested object and overlay it, so the same checks apply.
    json patch = value;
    std::string rest = path;
    std::vector<std::string> keys;
    std::size_t pos;
    while ((pos = rest.find('.')) != std::string::npos) {
        keys.push_back(rest.substr(0, pos));
        rest = rest.substr(pos + 1);
    }
    keys.push_back(rest);
    for (auto it = keys.rbegin(); it != keys.rend(); ++it) patch = json{{*it, patch}};
    overlay(cfg, patch, "");
}

json load_config(const std::string& path, const std::vector<std::string>& sets) {
    json cfg = default_config();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("--config", "cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        json file;
        try {
            file = json::parse(text);
        } catch (const json::parse_error& e) {
            auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
            throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col), "malformed config");
        }
        if (!file.is_object()) throw ConfigError(path, "top level must be an object");
        overlay(cfg, file, "");
    }
    for (const auto& s : sets) apply_set(cfg, s);
    return cfg;
}

namespace {

template <class T>
T get(const json& cfg, const std::string& section, const std::string& key) {
    try {
        return cfg.at(section).at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(section + "." + key, "missing or of the wrong type");
    }
}

} // namespace

ModelParams model_params(const json& cfg) {
    ModelParams P;
    P.K = get<int>(cfg, "model", "K");
    P.L = get<double>(cfg, "model", "L");
    P.m = get<double>(cfg, "model", "m");
    P.beta = get<double>(cfg, "model", "beta");
    P.lambda = get<double>(cfg, "model", "lambda");
    P.p = get<double>(cfg, "model", "p");
    P.kappa = get<double>(cfg, "model", "kappa");
    P.r = get<double>(cfg, "model", "r");
    auto form = get<std::string>(cfg, "model", "kappa_form");
    if (form == "power") P.kappa_form = KappaForm::Power;
    else if (form == "over_r") P.kappa_form = KappaForm::OverR;
    else if (form == "over_2r") P.kappa_form = KappaForm::Over2R;
    else throw ConfigError("model.kappa_form", "one of power, over_r, over_2r");
    P.validate();
    return P;
}

IntegratorCfg integrator_cfg(const json& cfg, const std::string& section) {
    IntegratorCfg c;
    c.dt = get<double>(cfg, section, "dt");
    if (section == "integrator") {
        c.n_steps = get<long>(cfg, section, "steps");
        auto scheme = get<std::string>(cfg, section, "scheme");
        if (scheme == "strang") c.scheme = Scheme::StrangOU;
        else if (scheme == "euler") c.scheme = Scheme::EulerMaruyama;
        else throw ConfigError("integrator.scheme", "one of strang, euler");
    } else {
        c.n_steps = std::lround(get<double>(cfg, section, "T") / c.dt);
    }
    c.record_every = get<int>(cfg, section, "record_every");
    c.validate();
    return c;
}

ChainConfig chain_cfg(const json& cfg) {
    ChainConfig c;
    c.burn_in = get<int>(cfg, "chain", "burn_in");
    c.thin = get<int>(cfg, "chain", "thin");
    c.rho = get<double>(cfg, "chain", "rho");
    c.adapt = get<bool>(cfg, "chain", "adapt");
    c.target_accept = get<double>(cfg, "chain", "target_accept");
    auto prop = get<std::string>(cfg, "chain", "proposal");
    if (prop == "pcn") c.proposal = Proposal::PCN;
    else if (prop == "independence") c.proposal = Proposal::Independence;
    else throw ConfigError("chain.proposal", "one of pcn, independence");
    if (c.burn_in < 0) throw ConfigError("chain.burn_in", "must be non-negative");
    if (c.thin < 1) throw ConfigError("chain.thin", "must be at least 1");
    if (!(c.rho > 0 && c.rho <= 1)) throw ConfigError("chain.rho", "must lie in (0, 1]");
    if (get<int>(cfg, "chain", "chains") < 1) throw ConfigError("chain.chains", "must be at least 1");
    return c;
}

FdModel fd_model(const json& cfg) {
    FdModel m;
    m.n_modes = get<int>(cfg, "fdm", "n_modes");
    m.nu = get<std::vector<double>>(cfg, "fdm", "nu");
    m.s = get<double>(cfg, "fdm", "s");
    m.r = get<int>(cfg, "fdm", "r");
    m.g = get<double>(cfg, "fdm", "g");
    m.quartic = get<double>(cfg, "fdm", "quartic");
    m.hermite_cut = get<int>(cfg, "fdm", "cut");
    auto method = get<std::string>(cfg, "fdm", "method");
    if (method == "auto") m.method = FdMethod::Auto;
    else if (method == "hermite") m.method = FdMethod::Hermite;
    else if (method == "transformed") m.method = FdMethod::Transformed;
    else throw ConfigError("fdm.method", "one of auto, hermite, transformed");
    m.validate();
    return m;
}

void check_preconditions(const json& cfg, const std::string& command) {
    auto P = model_params(cfg);
    bool weighted = command == "sample" ? cfg["sample"]["kind"] == "ggc"
                    : command == "evolve" ? cfg["evolve"]["dynamics"] == "ggc_sde" || cfg["evolve"]["init"] == "ggc"
                                          : command == "sweep" || command == "relax";
    if (!weighted) return;
    if (P.lambda > 0 && !(P.kappa > 0)) throw ConfigError("model.kappa", "kappa > 0 required whenever lambda > 0");
    if (!(P.p < 6)) throw ConfigError("model.p", "the weight is not integrable for p >= 6");
    if (command == "sweep")
        for (const auto& l : cfg["sweep"]["lambdas"])
            for (const auto& k : cfg["sweep"]["kappas"])
                if (l.get<double>() > 0 && !(k.get<double>() > 0))
                    throw ConfigError("sweep.kappas", "kappa > 0 required whenever lambda > 0");
}

std::vector<std::string> window_violations(const json& cfg, const std::string& command) {
    std::vector<std::string> v;
    auto P = model_params(cfg);
    double s = cfg["noise"]["s"].get<double>();
    bool noisy = command == "relax" || (command == "evolve" && cfg["evolve"]["dynamics"] != "nls");
    if (noisy) {
        if (!(s > 7.0 / 16.0 && s < 0.5)) v.push_back("noise.s: outside the window 7/16 < s < 1/2");
        if (!(P.beta * P.m * P.m >= 1.0)) v.push_back("model.m: beta m^2 < 1 breaks I <= sigma^2 C^{-1}");
    }
    bool weighted = command == "sweep" || command == "relax" || (command == "sample" && cfg["sample"]["kind"] == "ggc") ||
                    (command == "evolve" && cfg["evolve"]["dynamics"] == "ggc_sde");
    if (weighted && P.lambda > 0 && !(P.r > 9.0)) v.push_back("model.r: integrability is covered for r > 9 only");
    if (command == "relax" && P.p != 4.0) v.push_back("model.p: relaxation is covered for p = 4 only");
    if (command == "fdm") {
        double fs = cfg["fdm"]["s"].get<double>();
        if (!(fs < 0.5)) v.push_back("fdm.s: the free trace diverges for s >= 1/2");
    }
    return v;
}

} // namespace snls::cli

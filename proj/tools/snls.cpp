#include "commands.hpp"

#include "snls/error.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace snls;
using namespace snls::cli;

namespace {

enum Exit { Ok = 0, Invariant = 1, Config = 2, Numerical = 3 };

int finish(RunRecord& rec) {
    write_manifest(rec);
    std::printf("%s: %s, manifest %s\n", rec.command.c_str(), rec.status == 0 ? "ok" : "invariant failure",
                (rec.out_dir / "manifest.json").string().c_str());
    return rec.status == 0 ? Ok : Invariant;
}

int replay(const std::string& manifest_path, const std::string& out) {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("replay", "cannot open " + manifest_path);
    json m;
    try {
        m = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("replay", std::string("malformed manifest: ") + e.what());
    }
    RunRecord rec;
    rec.command = m.at("command").get<std::string>();
    // Re-validate through the loader so a hand-edited manifest cannot smuggle
    // in unknown keys.
    rec.config = default_config();
    for (auto it = m.at("config").begin(); it != m.at("config").end(); ++it)
        apply_set(rec.config, it.key() + "=" + it.value().dump());
    rec.out_dir = out.empty() ? std::filesystem::path(manifest_path).parent_path() / "replay" : std::filesystem::path(out);
    validate_for(rec);
    run_command(rec);
    write_manifest(rec);

    int diffs = 0;
    for (const auto& o : m.at("outputs")) {
        auto name = o.at("path").get<std::string>();
        auto p = rec.out_dir / name;
        bool same = std::filesystem::exists(p) && sha256_file(p) == o.at("sha256").get<std::string>();
        std::printf("%-6s %s\n", same ? "same" : "DIFF", name.c_str());
        if (!same) ++diffs;
    }
    if (rec.outputs.size() != m.at("outputs").size()) ++diffs;
    std::printf("replay: %s\n", diffs ? "outputs differ" : "identical outputs");
    return diffs ? Invariant : Ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic NLS sampling, dynamics and spectral checks"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool override_windows = false;

    // Precedence: built-in defaults < --config file < --set assignments < dedicated flags.
    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "JSON config file");
        sub->add_option("-s,--set", sets, "override a key, e.g. model.K=64")->allow_extra_args(false);
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--workers", workers, "worker threads");
        sub->add_option("-o,--out", out_dir, "output directory");
        sub->add_flag("--override", override_windows, "run outside the covered parameter windows");
    };

    std::string kind;
    auto* sample = app.add_subcommand("sample", "draw fields from a measure");
    sample->add_option("kind", kind, "free, canonical or ggc")->required();
    auto* evolve = app.add_subcommand("evolve", "integrate one trajectory");
    evolve->add_option("dynamics", kind, "nls, ggc_sde or canonical_sde")->required();
    auto* verify = app.add_subcommand("verify", "run an invariant suite");
    verify->add_option("suite", kind, "field, measures, dynamics or operators")->required();
    auto* sweep = app.add_subcommand("sweep", "log partition function over a (lambda, kappa) grid");
    auto* relax = app.add_subcommand("relax", "relaxation rates from cold and hot ensembles");
    auto* fdm = app.add_subcommand("fdm", "finite-dimensional spectrum and trace bounds");
    for (auto* sub : {sample, evolve, verify, sweep, relax, fdm}) common(sub);

    std::string manifest_path, replay_out;
    auto* rep = app.add_subcommand("replay", "rerun a manifest and compare output digests");
    rep->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
    rep->add_option("-o,--out", replay_out, "output directory (default: <run>/replay)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? Ok : Config;
    }

    try {
        if (rep->parsed()) return replay(manifest_path, replay_out);

        RunRecord rec;
        rec.command = app.get_subcommands().front()->get_name();
        if (rec.command == "sample") sets.push_back("sample.kind=\"" + kind + "\"");
        if (rec.command == "evolve") sets.push_back("evolve.dynamics=\"" + kind + "\"");
        if (rec.command == "verify") sets.push_back("verify.suite=\"" + kind + "\"");
        if (seed) sets.push_back("seed=" + std::to_string(*seed));
        if (workers) sets.push_back("workers=" + std::to_string(*workers));
        if (!out_dir.empty()) sets.push_back("output_dir=" + json(out_dir).dump());
        if (override_windows) sets.push_back("override=true");
        rec.config = load_config(config_path, sets);
        rec.out_dir = rec.config.at("output_dir").get<std::string>();
        validate_for(rec);
        run_command(rec);
        return finish(rec);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return Config;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical fault: %s\n", e.what());
        return Numerical;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return Config;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return Numerical;
    }
}

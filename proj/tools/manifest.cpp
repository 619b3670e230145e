#include "manifest.hpp"

#include "snls/error.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#ifndef SNLS_CODE_VERSION
#define SNLS_CODE_VERSION "unknown"
#endif

namespace snls::cli {

namespace {

std::string hex(const unsigned char* d, unsigned n) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < n; ++i) {
        s += digits[d[i] >> 4];
        s += digits[d[i] & 15];
    }
    return s;
}

struct Digest {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), EVP_MD_CTX_free};
    Digest() {
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
            throw NumericalError(FaultKind::Io, "sha256 initialisation failed");
    }
    void update(const void* p, std::size_t n) { EVP_DigestUpdate(ctx.get(), p, n); }
    std::string finish() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned n = 0;
        EVP_DigestFinal_ex(ctx.get(), md, &n);
        return hex(md, n);
    }
};

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NumericalError(FaultKind::Io, "cannot read " + path.string());
    Digest d;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) d.update(buf, std::size_t(in.gcount()));
    return d.finish();
}

std::string sha256_text(const std::string& text) {
    Digest d;
    d.update(text.data(), text.size());
    return d.finish();
}

std::string run_id(const std::string& command, const json& cfg) {
    return sha256_text(command + "\n" + cfg.dump()).substr(0, 16);
}

json build_manifest(const RunRecord& rec) {
    json outs = json::array();
    for (const auto& name : rec.outputs) {
        auto p = rec.out_dir / name;
        outs.push_back({{"path", name}, {"sha256", sha256_file(p)}, {"bytes", std::filesystem::file_size(p)}});
    }
    return {
        {"run_id", run_id(rec.command, rec.config)},
        {"timestamp", utc_now()},
        {"command", rec.command},
        {"config", rec.config},
        {"master_seed", rec.config.at("seed")},
        {"code_version", SNLS_CODE_VERSION},
        {"streams", "philox4x32-10; master = Stream(seed, 0); task i draws from master.split(i)"},
        {"overrides", rec.overrides},
        {"diagnostics", rec.diagnostics},
        {"status", rec.status},
        {"outputs", outs},
    };
}

void write_manifest(const RunRecord& rec) {
    auto m = build_manifest(rec);
    std::ofstream out(rec.out_dir / "manifest.json");
    out << m.dump(2) << "\n";
    if (!out) throw NumericalError(FaultKind::Io, "cannot write manifest in " + rec.out_dir.string());
}

} // namespace snls::cli

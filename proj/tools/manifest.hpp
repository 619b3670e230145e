#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace snls::cli {

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_text(const std::string& text);

// The run id is derived from the command and the full config, so a replay
// reproduces it.
std::string run_id(const std::string& command, const json& cfg);

struct RunRecord {
    std::string command;
    json config;
    std::filesystem::path out_dir;
    std::vector<std::string> outputs; // file names relative to out_dir
    std::vector<std::string> overrides;
    json diagnostics = json::object();
    int status = 0;
};

json build_manifest(const RunRecord& rec);
void write_manifest(const RunRecord& rec);

} // namespace snls::cli

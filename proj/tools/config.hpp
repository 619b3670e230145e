#pragma once

#include "snls/dynamics.hpp"
#include "snls/fdmodel.hpp"
#include "snls/field.hpp"
#include "snls/measures.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace snls::cli {

using json = nlohmann::json;

// Every recognised key with its default value.
json default_config();

// Defaults, then the file (if any), then each "a.b.c=value" assignment.
// Unknown keys and type mismatches are configuration faults naming the key;
// a malformed file reports its line and column.
json load_config(const std::string& path, const std::vector<std::string>& sets);

// Applies one "a.b.c=value" assignment; the value is read as JSON when it
// parses, as a string otherwise.
void apply_set(json& cfg, const std::string& assignment);

ModelParams model_params(const json& cfg);
IntegratorCfg integrator_cfg(const json& cfg, const std::string& section = "integrator");
ChainConfig chain_cfg(const json& cfg);
FdModel fd_model(const json& cfg);

// Parameter choices outside the windows the theory covers. Empty when
// everything is in range.
std::vector<std::string> window_violations(const json& cfg, const std::string& command);

// Hard preconditions (no override): e.g. kappa > 0 whenever lambda > 0 for
// anything built on the grand-canonical weight.
void check_preconditions(const json& cfg, const std::string& command);

} // namespace snls::cli

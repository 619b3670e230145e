#pragma once

#include "config.hpp"

#include <string>
#include <vector>

namespace snls::cli {

struct ReportRow {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool at_least = false; // pass when statistic >= threshold instead of <=
    bool pass = false;
};

// Names and default thresholds of the invariants registered for a suite.
std::vector<std::pair<std::string, double>> suite_invariants(const std::string& suite);
const std::vector<std::string>& suite_names();

// Runs one suite. Thresholds come from verify.tolerances when present;
// a tolerance naming no registered invariant is a configuration fault.
std::vector<ReportRow> run_suite(const std::string& suite, const json& cfg);

} // namespace snls::cli

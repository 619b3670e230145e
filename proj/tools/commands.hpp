#pragma once

#include "manifest.hpp"

namespace snls::cli {

// Runs rec.command with rec.config, writing outputs into rec.out_dir and
// filling rec.outputs, rec.diagnostics and rec.status (0 or 1).
void run_command(RunRecord& rec);

// Validation shared by fresh runs and replays: hard preconditions always,
// window violations unless the config's override flag is set.
void validate_for(RunRecord& rec);

} // namespace snls::cli

#pragma once

// Experiment orchestration: one driver per subcommand. Every driver writes
// its outputs (CSV series, field dumps, pathlaw files) plus config.resolved
// and manifest.txt into the configured output directory, and returns exit 0
// iff every enabled check passed.

#include <filesystem>

#include "eulermv/config.hpp"
#include "eulermv/manifest.hpp"
#include "eulermv/pathlaw.hpp"

namespace eulermv {

struct RunResult {
    int exit_code = 0;
    RunManifest manifest;
};

// strict upgrades warnings (recorded path failures, unasserted trends) to
// check failures
RunResult run(const RunConfig& cfg, bool strict = false);

// individual drivers (exposed for tests)
RunResult run_simulate(const RunConfig& cfg, bool strict = false);
RunResult run_compare(const RunConfig& cfg, bool strict = false);
RunResult run_defect(const RunConfig& cfg, bool strict = false);
RunResult run_ensemble_cmd(const RunConfig& cfg, bool strict = false);
RunResult run_select(const RunConfig& cfg, bool strict = false);

// the constructed selection toy used by the select driver and its tests:
// candidate sets over labels {0 = A, 1 = B} on a two-step grid with exactly
// one Markov selection
struct SelectionToy {
    pathlaw::CandidateMap candidates;
    std::vector<pathlaw::DiscountedFunctional> functionals;
    std::map<int, int> expected_choice; // label -> index of the Markov member
};
SelectionToy make_selection_toy();

} // namespace eulermv

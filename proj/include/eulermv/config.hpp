#pragma once

// Run configuration: INI-style text (bracketed sections, key = value lines,
// '#' comments). Unknown sections or keys are rejected; the parser reports
// every error it finds, not only the first.

#include <cstdint>
#include <string>
#include <vector>

#include "eulermv/field.hpp"
#include "eulermv/noise.hpp"
#include "eulermv/scheme.hpp"
#include "eulermv/thermo.hpp"

namespace eulermv {

struct RunConfig {
    // [run]
    std::string kind = "simulate"; // simulate|compare|defect|ensemble|select|check-config
    double horizon = 0.0;
    double snapshot_interval = 0.0;
    std::uint64_t seed = 0;
    std::string out = "out";
    int threads = 1;

    // [grid]
    int dim = 1;
    int points = 64;
    int modes = 21;
    double length = 1.0;

    // [thermo]
    double gamma = 1.4;

    // [noise]
    NoiseConfig noise;

    // [solver]
    double h = 1e-3;
    int substeps = 0;
    double eps_visc = 0.0;
    double R_cutoff = 1e6;
    double mass_solver_tol = 1e-10;
    double rho_floor = 1e-8;
    double h_min = 1e-9;
    bool upwind = false;

    // [initial]
    std::string initial_family = "stationary";
    double rho_bar = 1.0;
    double s_bar = 0.0;
    double amplitude = 0.0;
    int mode = 1;

    // [ensemble]
    int n_paths = 100;
    int test_mode = 0; // budget test field: 0 = constant e_0, k>0 = cos(2 pi k x_0) e_0

    // [compare]
    double delta = 0.0;
    int coarse_factor = 1;
    bool envelope = true;

    // [defect]
    int defect_factor = 2;

    GridSpec grid() const;
    ThermoParams thermo() const;
    SolverConfig solver() const;
};

struct ParseOutcome {
    bool ok = false;
    RunConfig config;
    std::vector<std::string> errors;
};

ParseOutcome parse_config(const std::string& text);

// canonical text form; parse(emit(c)) reproduces c
std::string emit_config(const RunConfig& c);

// override seed/out/threads from EULERMV_SEED / EULERMV_OUT / EULERMV_THREADS
void apply_env_overrides(RunConfig& c);

} // namespace eulermv

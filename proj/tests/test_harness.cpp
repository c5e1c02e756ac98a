#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <cmath>
#include <fstream>

#include "eulermv/harness.hpp"
#include "eulermv/initial.hpp"
#include "eulermv/io.hpp"

using namespace eulermv;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("eulermv_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunConfig base_config(const std::string& kind, const fs::path& out) {
    RunConfig cfg;
    cfg.kind = kind;
    cfg.out = out.string();
    cfg.dim = 1;
    cfg.points = 24;
    cfg.modes = 8;
    cfg.h = 1e-3;
    cfg.horizon = 0.01;
    cfg.snapshot_interval = 5e-3;
    return cfg;
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("initial conditions: stationary and degenerate pulse") {
    GridSpec g(1, 24, 8);
    SolverConfig cfg;
    cfg.thermo = ThermoParams(1.4);

    InitialParams stat;
    FluidState a = initial_condition(stat, g, cfg);
    CHECK(a.rho.max_value() == doctest::Approx(1.0));
    CHECK(a.rho.min_value() == doctest::Approx(1.0));
    CHECK(a.mom.l2norm() == 0.0);
    CHECK(std::abs(a.S.max_value()) < 1e-14);

    InitialParams pulse;
    pulse.family = "density-pulse";
    pulse.amplitude = 0.0;
    FluidState b = initial_condition(pulse, g, cfg);
    CHECK(std::sqrt((b.rho - a.rho).l2sq()) < 1e-14);

    InitialParams bad;
    bad.family = "vortex";
    CHECK_THROWS_AS(initial_condition(bad, g, cfg), ConfigError);
}

TEST_CASE("isentropic wave propagates at the acoustic speed") {
    GridSpec g(1, 64, 21);
    SolverConfig cfg;
    cfg.h = 1e-4;
    cfg.thermo = ThermoParams(1.4);
    InitialParams ip;
    ip.family = "isentropic-wave";
    ip.amplitude = 1e-4; // linear regime
    ip.mode = 1;
    FluidState st = initial_condition(ip, g, cfg);

    const double c = sound_speed(ip, cfg.thermo);
    CHECK(c == doctest::Approx(std::sqrt(1.4)).epsilon(1e-12));

    TrajectoryOptions opt;
    opt.horizon = 0.05;
    opt.snapshot_interval = 0.05;
    NoiseModel quiet = NoiseModel::build(g, NoiseConfig{});
    Trajectory tr = run_trajectory(st, cfg, quiet, opt);
    REQUIRE(!tr.failed);

    // phase of the k=1 density mode moves by -c t: delta rho ~ cos(2pi(x - ct))
    const std::complex<double> c0 = st.rho.spec()[1];
    const std::complex<double> c1 = tr.back().rho.spec()[1];
    const double phase = std::arg(c1 / c0);
    const double expected = -2.0 * 3.14159265358979323846 * c * opt.horizon;
    CHECK(phase == doctest::Approx(expected).epsilon(2e-2));
}

TEST_CASE("simulate driver writes ledger, snapshots and a checksummed manifest") {
    fs::path out = temp_dir("simulate");
    RunConfig cfg = base_config("simulate", out);
    RunResult res = run_simulate(cfg);
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(out / "ledger.csv"));
    CHECK(fs::exists(out / "config.resolved"));
    CHECK(fs::exists(out / "manifest.txt"));
    CHECK(fs::exists(out / "state_0000.bin"));

    // manifest checksums verify post-hoc
    const std::string manifest = io::read_text_file(out / "manifest.txt");
    const std::string expected = "ledger.csv = sha256:" + sha256_file(out / "ledger.csv");
    CHECK(manifest.find(expected) != std::string::npos);
}

TEST_CASE("re-running from the resolved config is bit-identical") {
    fs::path out1 = temp_dir("rerun1");
    RunConfig cfg = base_config("simulate", out1);
    cfg.noise.K = 2;
    cfg.noise.sigma = 0.3;
    cfg.seed = 31415;
    RunResult first = run_simulate(cfg);
    REQUIRE(first.exit_code == 0);

    ParseOutcome parsed = parse_config(io::read_text_file(out1 / "config.resolved"));
    REQUIRE(parsed.ok);
    fs::path out2 = temp_dir("rerun2");
    parsed.config.out = out2.string();
    RunResult second = run_simulate(parsed.config);
    REQUIRE(second.exit_code == 0);

    CHECK(sha256_file(out1 / "ledger.csv") == sha256_file(out2 / "ledger.csv"));
    CHECK(sha256_file(out1 / "state_0002.bin") == sha256_file(out2 / "state_0002.bin"));
}

TEST_CASE("state dumps round trip through the binary format") {
    GridSpec g(2, 12, 4);
    SolverConfig scfg;
    scfg.thermo = ThermoParams(1.4);
    InitialParams ip;
    ip.family = "density-pulse";
    ip.amplitude = 0.2;
    FluidState st = initial_condition(ip, g, scfg);

    fs::path out = temp_dir("dump");
    io::write_state_dump(out / "state.bin", st);
    FluidState back = io::read_state_dump(out / "state.bin");
    CHECK(back.rho.grid() == g);
    for (std::size_t i = 0; i < st.rho.phys().size(); ++i) {
        CHECK(back.rho.phys()[i] == st.rho.phys()[i]);
        CHECK(back.S.phys()[i] == st.S.phys()[i]);
    }
}

TEST_CASE("compare driver: matched data passes all checks") {
    fs::path out = temp_dir("compare");
    RunConfig cfg = base_config("compare", out);
    cfg.initial_family = "isentropic-wave";
    cfg.amplitude = 0.05;
    RunResult res = run_compare(cfg);
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(out / "relentropy.csv"));
    bool saw_envelope = false, saw_zero = false;
    for (const auto& c : res.manifest.checks) {
        if (c.name == "matched_below_envelope") saw_envelope = c.pass;
        if (c.name == "matched_e_rel_zero") saw_zero = c.pass;
    }
    CHECK(saw_envelope);
    CHECK(saw_zero);
}

TEST_CASE("ensemble driver refuses insufficient paths with a useful message") {
    fs::path out = temp_dir("ens_small");
    RunConfig cfg = base_config("ensemble", out);
    cfg.n_paths = 10;
    RunResult res = run_ensemble_cmd(cfg);
    CHECK(res.exit_code == 2);
    REQUIRE(!res.manifest.checks.empty());
    CHECK(res.manifest.checks[0].detail.find("at least 30") != std::string::npos);
}

TEST_CASE("select driver finds the unique Markov selection and writes laws") {
    fs::path out = temp_dir("select");
    RunConfig cfg = base_config("select", out);
    RunResult res = run_select(cfg);
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(out / "selected_law_0.txt"));
    CHECK(fs::exists(out / "empirical_law.txt"));
    bool unique = false;
    for (const auto& c : res.manifest.checks)
        if (c.name == "unique_markov") unique = c.pass;
    CHECK(unique);
}

TEST_CASE("environment overrides are applied") {
    RunConfig cfg;
    setenv("EULERMV_SEED", "777", 1);
    setenv("EULERMV_THREADS", "3", 1);
    apply_env_overrides(cfg);
    unsetenv("EULERMV_SEED");
    unsetenv("EULERMV_THREADS");
    CHECK(cfg.seed == 777);
    CHECK(cfg.threads == 3);
}

} // TEST_SUITE

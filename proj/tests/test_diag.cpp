#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eulermv/diag.hpp"
#include "eulermv/ensemble.hpp"
#include "eulermv/initial.hpp"

using namespace eulermv;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SolverConfig basic_solver(double h = 1e-3, double gamma = 1.4) {
    SolverConfig cfg;
    cfg.h = h;
    cfg.thermo = ThermoParams(gamma);
    return cfg;
}

NoiseModel no_noise(const GridSpec& g) { return NoiseModel::build(g, NoiseConfig{}); }

SpectralVectorField const_vector(const GridSpec& g, double v) {
    SpectralVectorField u = SpectralVectorField::zeros(g);
    u.comp[0] = SpectralField::from_physical(g, std::vector<double>(g.points(), v));
    return u;
}

} // namespace

TEST_SUITE("diag") {

TEST_CASE("total energy of the unit stationary state") {
    GridSpec g(1, 24, 8);
    SolverConfig cfg = basic_solver(1e-3, 2.0); // c_v = 1
    FluidState st = initial_condition(InitialParams{}, g, cfg);
    CHECK(total_energy(st, nullptr, cfg.thermo) == doctest::Approx(1.0).epsilon(1e-12));

    // adding a defect with tr R_conv = 2 raises the energy by 1/2 * 2 * |T|
    DefectEstimate de;
    de.coarse = g;
    de.r_conv.assign(g.points(), {2.0});
    de.r_press.assign(g.points(), 0.0);
    CHECK(total_energy(st, &de, cfg.thermo) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("total energy is even in the momentum and translation invariant") {
    GridSpec g(1, 24, 8);
    SolverConfig cfg = basic_solver();
    InitialParams ip;
    ip.family = "isentropic-wave";
    ip.amplitude = 0.1;
    FluidState st = initial_condition(ip, g, cfg);
    FluidState flipped = st;
    flipped.mom = st.mom.scaled(-1.0);
    CHECK(total_energy(st, nullptr, cfg.thermo) ==
          doctest::Approx(total_energy(flipped, nullptr, cfg.thermo)).epsilon(1e-14));

    // circular shift of all fields by a quarter of the torus
    auto rotate = [&](const SpectralField& f) {
        std::vector<double> v(f.phys().size());
        const std::size_t off = v.size() / 4;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.phys()[(i + off) % v.size()];
        return SpectralField::from_physical(g, std::move(v));
    };
    FluidState moved;
    moved.rho = rotate(st.rho);
    moved.S = rotate(st.S);
    moved.mom.comp.push_back(rotate(st.mom.comp[0]));
    CHECK(total_energy(moved, nullptr, cfg.thermo) ==
          doctest::Approx(total_energy(st, nullptr, cfg.thermo)).epsilon(1e-12));
}

TEST_CASE("per-step energy residual decays at order two or better under h-refinement") {
    GridSpec g(1, 32, 10);
    InitialParams ip;
    ip.family = "isentropic-wave";
    ip.amplitude = 0.05;
    const double T = 0.02;

    auto max_residual = [&](double h) {
        SolverConfig cfg = basic_solver(h);
        FluidState st = initial_condition(ip, g, cfg);
        TrajectoryOptions opt;
        opt.horizon = T;
        opt.snapshot_interval = T;
        Trajectory tr = run_trajectory(st, cfg, no_noise(g), opt);
        REQUIRE(!tr.failed);
        double r = 0.0;
        for (const auto& row : tr.ledger.rows) r = std::max(r, std::abs(row.residual));
        return r;
    };

    const double r1 = max_residual(1e-3);
    const double r2 = max_residual(5e-4);
    const double r3 = max_residual(2.5e-4);
    const double p1 = std::log2(r1 / r2);
    const double p2 = std::log2(r2 / r3);
    CHECK(p1 >= 2.0);
    CHECK(p2 >= 2.0);
}

TEST_CASE("noisy runs: ensemble mean of the cumulative residual is unbiased") {
    GridSpec g(1, 8, 2);
    SolverConfig cfg = basic_solver(1e-3);
    NoiseConfig nc;
    nc.K = 1;
    nc.sigma = 0.4;
    nc.family = "constant";

    EnsembleSpec spec;
    spec.n_paths = 200;
    spec.base_seed = 2024;
    spec.cfg = cfg;
    spec.noise = NoiseModel::build(g, nc);
    spec.initial = initial_condition(InitialParams{}, g, cfg);
    spec.traj.horizon = 0.02;
    spec.traj.snapshot_interval = 0.02;
    Ensemble ens = run_ensemble(spec);

    std::vector<double> cumres;
    for (const auto& tr : ens.paths) {
        double acc = 0.0;
        for (const auto& row : tr.ledger.rows) acc += row.residual;
        cumres.push_back(acc);
    }
    stats::Summary s = stats::summarize(cumres);
    CHECK(std::abs(s.mean) <= 3.0 * s.se);
}

TEST_CASE("relative energy vanishes exactly at the reference") {
    GridSpec g(1, 24, 8);
    SolverConfig cfg = basic_solver();
    InitialParams ip;
    ip.family = "density-pulse";
    ip.amplitude = 0.2;
    ip.s_bar = 0.1;
    FluidState st = initial_condition(ip, g, cfg);
    ReferenceTriple ref = reference_from_state(st, cfg.thermo);
    RelEntropyReport rep = relative_energy(st, ref, nullptr, cfg.thermo);
    CHECK(std::abs(rep.value) < 1e-12);
    CHECK(rep.ess_part + rep.res_part == doctest::Approx(rep.value).epsilon(1e-12));
}

TEST_CASE("relative energy of a uniform velocity offset is the closed-form kinetic term") {
    GridSpec g(1, 24, 8);
    SolverConfig cfg = basic_solver();
    InitialParams ip;
    ip.family = "density-pulse";
    ip.amplitude = 0.15;
    FluidState st = initial_condition(ip, g, cfg);
    ReferenceTriple ref = reference_from_state(st, cfg.thermo);

    const double delta = 0.01;
    SpectralVectorField u = const_vector(g, delta);
    FluidState shifted = make_state(st.rho, u, st.S, cfg);
    RelEntropyReport rep = relative_energy(shifted, ref, nullptr, cfg.thermo);
    const double expected = 0.5 * delta * delta * st.rho.integral();
    CHECK(rep.value == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("relative energy is nonnegative on random admissible pairs") {
    GridSpec g(1, 16, 5);
    SolverConfig cfg = basic_solver();
    std::mt19937_64 eng(12);
    std::uniform_real_distribution<double> pos(0.4, 2.5), vel(-0.8, 0.8);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> rho(g.points()), S(g.points()), m(g.points());
        std::vector<double> r(g.points()), Th(g.points()), U(g.points());
        for (std::size_t i = 0; i < g.points(); ++i) {
            const double theta = pos(eng);
            rho[i] = pos(eng);
            S[i] = rho[i] * (cfg.thermo.c_v * std::log(theta) - std::log(rho[i]));
            m[i] = rho[i] * vel(eng);
            r[i] = pos(eng);
            Th[i] = pos(eng);
            U[i] = vel(eng);
        }
        FluidState st;
        st.rho = SpectralField::from_physical(g, std::move(rho));
        st.S = SpectralField::from_physical(g, std::move(S));
        st.mom.comp.push_back(SpectralField::from_physical(g, std::move(m)));
        ReferenceTriple ref;
        ref.r = SpectralField::from_physical(g, std::move(r));
        ref.Theta = SpectralField::from_physical(g, std::move(Th));
        ref.U.comp.push_back(SpectralField::from_physical(g, std::move(U)));
        RelEntropyReport rep = relative_energy(st, ref, nullptr, cfg.thermo);
        CHECK(rep.value >= -1e-12);
    }
}

TEST_CASE("ess/res splitting is an exact partition") {
    GridSpec g(1, 24, 8);
    SolverConfig cfg = basic_solver();
    InitialParams ip;
    ip.family = "density-pulse";
    ip.amplitude = 0.3;
    FluidState st = initial_condition(ip, g, cfg);

    PhaseFunctional G = [](double rho, double E, const double* m, int dim) {
        double k = 0.0;
        for (int c = 0; c < dim; ++c) k += m[c] * m[c];
        return rho + E + k;
    };
    auto total = [&](const PhaseCutoff& Phi) {
        auto [ess, res] = ess_res_split(st, Phi, G, cfg.thermo);
        return std::pair{ess, res};
    };

    auto [e1, r1] = total([](double, double) { return 1.0; });
    CHECK(r1 == 0.0);
    auto [e0, r0] = total([](double, double) { return 0.0; });
    CHECK(e0 == 0.0);
    CHECK(e1 == doctest::Approx(r0).epsilon(1e-14));

    // a genuinely mixed cutoff still partitions exactly
    auto bump = make_phase_bump(0.9, 1.05, 2.0, 2.4);
    auto [ess, res] = total(bump);
    CHECK(ess + res == doctest::Approx(e1).epsilon(1e-12));
    CHECK(ess > 0.0);
    CHECK(res > 0.0);
}

TEST_CASE("weak-strong monitor: self-comparison is identically zero") {
    GridSpec g(1, 24, 8);
    SolverConfig cfg = basic_solver(1e-3);
    InitialParams ip;
    ip.family = "isentropic-wave";
    ip.amplitude = 0.05;
    FluidState st = initial_condition(ip, g, cfg);
    TrajectoryOptions opt;
    opt.horizon = 0.02;
    opt.snapshot_interval = 5e-3;
    Trajectory strong = run_trajectory(st, cfg, no_noise(g), opt);
    REQUIRE(!strong.failed);
    CoarseTrajectory ct = coarse_grain_trajectory(strong, 1, cfg.thermo);
    WeakStrongReport rep = weak_strong_monitor(ct, strong, cfg);
    CHECK(rep.ok);
    for (const auto& pt : rep.series) CHECK(std::abs(pt.e_rel) < 1e-12);
}

TEST_CASE("weak-strong monitor: perturbed data obeys the Gronwall envelope and delta^2 contact") {
    GridSpec g(1, 24, 8);
    SolverConfig cfg = basic_solver(1e-3);
    InitialParams ip;
    ip.family = "isentropic-wave";
    ip.amplitude = 0.05;
    FluidState base = initial_condition(ip, g, cfg);
    TrajectoryOptions opt;
    opt.horizon = 0.02;
    opt.snapshot_interval = 5e-3;
    Trajectory strong = run_trajectory(base, cfg, no_noise(g), opt);
    REQUIRE(!strong.failed);

    std::vector<double> deltas = {1e-3, 2e-3, 4e-3};
    std::vector<double> e0s;
    for (double delta : deltas) {
        SpectralVectorField u0 = mass_operator_solve(base.rho, base.mom, 1e-12, g.modes);
        SpectralVectorField pert = const_vector(g, delta);
        u0.axpy_inplace(1.0, pert);
        FluidState perturbed = make_state(base.rho, u0, base.S, cfg);
        Trajectory weak = run_trajectory(perturbed, cfg, no_noise(g), opt);
        REQUIRE(!weak.failed);
        CoarseTrajectory ct = coarse_grain_trajectory(weak, 1, cfg.thermo);
        WeakStrongReport rep = weak_strong_monitor(ct, strong, cfg);
        e0s.push_back(rep.series.front().e_rel);
        for (const auto& pt : rep.series)
            CHECK(pt.e_rel <= pt.bound * 1.05 + 1e-12);
    }
    // least-squares slope of log E_rel(0) against log delta
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const double x = std::log(deltas[i]), y = std::log(e0s[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(deltas.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("weak-strong monitor rejects mismatched grids") {
    GridSpec g(1, 24, 8);
    SolverConfig cfg = basic_solver(1e-3);
    FluidState st = initial_condition(InitialParams{}, g, cfg);
    TrajectoryOptions opt;
    opt.horizon = 0.01;
    opt.snapshot_interval = 5e-3;
    Trajectory a = run_trajectory(st, cfg, no_noise(g), opt);
    opt.snapshot_interval = 1e-2;
    Trajectory b = run_trajectory(st, cfg, no_noise(g), opt);
    CoarseTrajectory ct = coarse_grain_trajectory(a, 1, cfg.thermo);
    CHECK_THROWS_AS(weak_strong_monitor(ct, b, cfg), ConfigError);
}

TEST_CASE("a-priori moment check: exact on the stationary ensemble, monotone in sigma") {
    GridSpec g(1, 8, 2);
    SolverConfig cfg = basic_solver(1e-3);
    FluidState st = initial_condition(InitialParams{}, g, cfg);

    // zero noise: the moment is E_0^p exactly
    {
        EnsembleSpec spec;
        spec.n_paths = 4;
        spec.cfg = cfg;
        spec.noise = no_noise(g);
        spec.initial = st;
        spec.traj.horizon = 0.01;
        spec.traj.snapshot_interval = 0.01;
        Ensemble ens = run_ensemble(spec);
        const double e0 = total_energy(st, nullptr, cfg.thermo);
        MomentReport r2 = apriori_moment_check(ens.paths, 2);
        CHECK(r2.value == doctest::Approx(e0 * e0).epsilon(1e-10));
        MomentReport r1 = apriori_moment_check(ens.paths, 1);
        CHECK(r1.value == doctest::Approx(e0).epsilon(1e-10));
        CHECK(r1.finite);
    }

    // doubling sigma never decreases the empirical moment
    double prev = -1.0;
    for (double sigma : {0.1, 0.2, 0.4}) {
        NoiseConfig nc;
        nc.K = 1;
        nc.sigma = sigma;
        nc.family = "constant";
        EnsembleSpec spec;
        spec.n_paths = 64;
        spec.base_seed = 5;
        spec.cfg = cfg;
        spec.noise = NoiseModel::build(g, nc);
        spec.initial = st;
        spec.traj.horizon = 0.02;
        spec.traj.snapshot_interval = 0.02;
        Ensemble ens = run_ensemble(spec);
        MomentReport rep = apriori_moment_check(ens.paths, 2);
        CHECK(rep.finite);
        CHECK(rep.value >= prev);
        prev = rep.value;
    }
}

TEST_CASE("energy balance residual helper matches the ledger") {
    GridSpec g(1, 16, 5);
    SolverConfig cfg = basic_solver(1e-3);
    NoiseConfig nc;
    nc.K = 1;
    nc.sigma = 0.2;
    NoiseModel noise = NoiseModel::build(g, nc);
    InitialParams ip;
    ip.family = "density-pulse";
    ip.amplitude = 0.1;
    FluidState st = initial_condition(ip, g, cfg);
    TrajectoryOptions opt;
    opt.horizon = 0.01;
    opt.snapshot_interval = 0.01;
    opt.seed = 4;
    Trajectory tr = run_trajectory(st, cfg, noise, opt);
    REQUIRE(!tr.failed);
    for (std::size_t i = 1; i < tr.ledger.rows.size(); ++i)
        CHECK(energy_balance_residual(tr.ledger.rows[i - 1], tr.ledger.rows[i]) ==
              doctest::Approx(tr.ledger.rows[i].residual).epsilon(1e-14));
}

} // TEST_SUITE

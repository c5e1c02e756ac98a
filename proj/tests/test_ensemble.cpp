#include <doctest.h>

#include <cmath>

#include "eulermv/ensemble.hpp"
#include "eulermv/initial.hpp"

using namespace eulermv;

namespace {

// flat-state benchmark: rho = 1, u = 0, S = 0, one constant forcing mode
EnsembleSpec flat_spec(int n_paths, double sigma, double horizon, double h,
                       std::uint64_t seed = 11) {
    GridSpec g(1, 8, 2);
    EnsembleSpec spec;
    spec.n_paths = n_paths;
    spec.base_seed = seed;
    spec.cfg.h = h;
    spec.cfg.thermo = ThermoParams(1.4);
    NoiseConfig nc;
    nc.K = 1;
    nc.sigma = sigma;
    nc.family = "constant";
    spec.noise = NoiseModel::build(g, nc);
    spec.initial = initial_condition(InitialParams{}, g, spec.cfg);
    spec.traj.horizon = horizon;
    spec.traj.snapshot_interval = horizon / 4;
    // constant test field e_0
    SpectralVectorField phi = SpectralVectorField::zeros(g);
    phi.comp[0] = SpectralField::from_physical(g, std::vector<double>(g.points(), 1.0));
    spec.traj.budget_phis.push_back(phi);
    return spec;
}

} // namespace

TEST_SUITE("ensemble") {

TEST_CASE("single path reduces to run_trajectory and reruns are identical") {
    EnsembleSpec spec = flat_spec(1, 0.3, 0.02, 1e-3);
    Ensemble a = run_ensemble(spec);
    CHECK(a.paths.size() == 1);
    CHECK(!a.paths[0].failed);

    Ensemble b = run_ensemble(spec);
    REQUIRE(a.paths[0].ledger.rows.size() == b.paths[0].ledger.rows.size());
    for (std::size_t i = 0; i < a.paths[0].ledger.rows.size(); ++i)
        CHECK(a.paths[0].ledger.rows[i].e_kin == b.paths[0].ledger.rows[i].e_kin);
}

TEST_CASE("threaded and sequential ensembles agree bitwise") {
    EnsembleSpec spec = flat_spec(8, 0.3, 0.02, 1e-3);
    Ensemble seq = run_ensemble(spec);
    spec.threads = 4;
    Ensemble par = run_ensemble(spec);
    for (int p = 0; p < 8; ++p) {
        const auto& ra = seq.paths[p].ledger.rows;
        const auto& rb = par.paths[p].ledger.rows;
        REQUIRE(ra.size() == rb.size());
        for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].e_kin == rb[i].e_kin);
    }
}

TEST_CASE("statistics are refused below the path minimum") {
    EnsembleSpec spec = flat_spec(10, 0.3, 0.02, 1e-3);
    Ensemble ens = run_ensemble(spec);
    CHECK_THROWS_AS((void)martingale_stat(ens, 0), ConfigError);
    CHECK_THROWS_AS((void)energy_martingale_stat(ens), ConfigError);
}

TEST_CASE("zero noise: the budget martingale vanishes pathwise") {
    EnsembleSpec spec = flat_spec(40, 0.0, 0.02, 1e-3);
    NoiseConfig nc; // K = 0
    spec.noise = NoiseModel::build(GridSpec(1, 8, 2), nc);
    Ensemble ens = run_ensemble(spec);
    for (const auto& tr : ens.paths) {
        const WeakBudget& wb = tr.budgets[0];
        for (std::size_t t = 0; t < wb.mom_phi.size(); ++t)
            CHECK(std::abs((wb.mom_phi[t] - wb.mom_phi[0]) - wb.flux_int[t]) < 1e-12);
    }
}

TEST_CASE("flat benchmark: Gaussian law of M_t, isometry and cross variation") {
    // m_t = sigma W_t e_0 pathwise; M_t(phi) = sigma |T| W_t with |T| = 1
    const double sigma = 0.5, T = 0.02, h = 1e-3;
    EnsembleSpec spec = flat_spec(400, sigma, T, h);
    Ensemble ens = run_ensemble(spec);
    MartingaleReport rep = martingale_stat(ens, 0);
    CHECK(rep.pass);
    REQUIRE(!rep.rows.empty());

    // compare the empirical variance at the final time against the closed
    // form rho^2 (int phi_1 . phi)^2 t = sigma^2 t
    const MartingaleRow& last = rep.rows.back();
    const double predicted_var = sigma * sigma * T;
    // var of the sample variance of a Gaussian: 2 var^2 / (n - 1)
    const double sd = std::sqrt(2.0 / (ens.paths.size() - 1)) * predicted_var;
    CHECK(std::abs(last.m.var - predicted_var) <= 3.0 * sd);

    // mean within 3 SE of zero at every report time (already in rep.pass)
    for (const auto& row : rep.rows) CHECK(std::abs(row.m.mean) <= rep.z_threshold * row.m.se);
}

TEST_CASE("flat benchmark: energy martingale is unbiased") {
    EnsembleSpec spec = flat_spec(400, 0.5, 0.02, 1e-3);
    Ensemble ens = run_ensemble(spec);
    MartingaleReport rep = energy_martingale_stat(ens);
    for (const auto& row : rep.rows)
        CHECK(std::abs(row.m.mean) <= rep.z_threshold * std::max(row.m.se, 1e-300));
}

TEST_CASE("doubling the path count shrinks the confidence interval at the CLT rate") {
    EnsembleSpec small = flat_spec(100, 0.5, 0.02, 1e-3, 21);
    EnsembleSpec big = flat_spec(400, 0.5, 0.02, 1e-3, 21);
    Ensemble e1 = run_ensemble(small);
    Ensemble e2 = run_ensemble(big);
    MartingaleReport r1 = martingale_stat(e1, 0);
    MartingaleReport r2 = martingale_stat(e2, 0);
    const double ratio = r1.rows.back().m.se / r2.rows.back().m.se;
    // quadrupling paths halves the SE, within 20 percent
    CHECK(ratio > 2.0 * 0.8);
    CHECK(ratio < 2.0 * 1.2);
}

TEST_CASE("disjoint seed ranges decorrelate the samples") {
    EnsembleSpec a = flat_spec(150, 0.5, 0.02, 1e-3, 1000);
    EnsembleSpec b = flat_spec(150, 0.5, 0.02, 1e-3, 900000);
    Ensemble ea = run_ensemble(a);
    Ensemble eb = run_ensemble(b);
    std::vector<double> ma, mb;
    for (int p = 0; p < 150; ++p) {
        const WeakBudget& wa = ea.paths[p].budgets[0];
        const WeakBudget& wb = eb.paths[p].budgets[0];
        ma.push_back((wa.mom_phi.back() - wa.mom_phi[0]) - wa.flux_int.back());
        mb.push_back((wb.mom_phi.back() - wb.mom_phi[0]) - wb.flux_int.back());
    }
    const double r = stats::correlation(ma, mb);
    CHECK(std::abs(r) <= 3.0 / std::sqrt(150.0));
}

TEST_CASE("orthogonality dictionary statistics are unbiased") {
    EnsembleSpec spec = flat_spec(300, 0.5, 0.02, 1e-3, 31);
    Ensemble ens = run_ensemble(spec);
    auto sums = orthogonality_stat(ens, 0, 1, 4);
    for (const auto& s : sums) CHECK(std::abs(s.mean) <= 3.5 * std::max(s.se, 1e-300));
}

TEST_CASE("normal quantile and Bonferroni threshold") {
    CHECK(stats::normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    CHECK(stats::normal_quantile(0.9986501019683699) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(stats::bonferroni_z(1) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(stats::bonferroni_z(10) > 3.0);
}

} // TEST_SUITE

#include <doctest.h>

#include <cmath>
#include <vector>

#include "eulermv/noise.hpp"
#include "eulermv/rng.hpp"

using namespace eulermv;

namespace {

NoiseConfig basic_cfg(int K, const char* family = "cosine") {
    NoiseConfig c;
    c.K = K;
    c.sigma = 0.5;
    c.decay_a = 1.0;
    c.family = family;
    return c;
}

} // namespace

TEST_SUITE("noise") {

TEST_CASE("model construction and Hilbert-Schmidt budget") {
    GridSpec g(1, 24, 8);
    NoiseModel m = NoiseModel::build(g, basic_cfg(4));
    CHECK(m.K() == 4);
    // sup |phi_k| = sigma k^-a, budget = sigma^2 sum k^-2
    double expected = 0.0;
    for (int k = 1; k <= 4; ++k) expected += 0.25 / (k * k);
    CHECK(m.hs_budget() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("band violation and budget cap are refused") {
    GridSpec g(1, 12, 4);
    CHECK_THROWS_AS(NoiseModel::build(g, basic_cfg(5)), ConfigError); // k=5 > m=4

    NoiseConfig tight = basic_cfg(2);
    tight.hs_budget_cap = 1e-6;
    CHECK_THROWS_AS(NoiseModel::build(g, tight), ConfigError);

    NoiseConfig flat = basic_cfg(2);
    flat.decay_a = 0.25; // not summable
    CHECK_THROWS_AS(NoiseModel::build(g, flat), ConfigError);
}

TEST_CASE("phi fields are band-limited to the Galerkin band") {
    GridSpec g(1, 24, 8);
    NoiseModel m = NoiseModel::build(g, basic_cfg(6));
    for (const auto& f : m.phi()) {
        SpectralVectorField proj = f.projected(g.modes);
        CHECK((proj - f).l2norm() < 1e-13);
    }
}

TEST_CASE("increments: empty path, determinism, variance") {
    GridSpec g(1, 12, 4);
    NoiseModel m = NoiseModel::build(g, basic_cfg(3));

    WienerPath empty = sample_increments(m, 0.1, 0, 99);
    CHECK(empty.steps() == 0);
    CHECK(empty.times.size() == 1);

    WienerPath a = sample_increments(m, 0.01, 50, 1234);
    WienerPath b = sample_increments(m, 0.01, 50, 1234);
    CHECK(a.increments == b.increments); // bit-identical

    WienerPath c = sample_increments(m, 0.01, 50, 1235);
    CHECK(a.increments != c.increments);

    // empirical variance of 1e5 draws within 3 sigma of dt:
    // var of the sample variance of N(0, dt) is 2 dt^2 / (n - 1)
    const double dt = 0.02;
    const int steps = 100000 / 3 + 1;
    WienerPath big = sample_increments(m, dt, steps, 7);
    std::vector<double> draws;
    for (const auto& row : big.increments)
        for (double x : row) draws.push_back(x);
    const std::size_t n = draws.size();
    double mean = 0.0;
    for (double x : draws) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : draws) var += (x - mean) * (x - mean);
    var /= (n - 1);
    const double sd_of_var = std::sqrt(2.0 / (n - 1)) * dt;
    CHECK(std::abs(var - dt) <= 3.0 * sd_of_var);
}

TEST_CASE("chi is the prescribed transition") {
    CHECK(chi(-1.0) == 1.0);
    CHECK(chi(0.0) == 1.0);
    CHECK(chi(1.0) == 0.0);
    CHECK(chi(2.0) == 0.0);
    double prev = 1.0;
    for (int i = 1; i < 100; ++i) {
        const double v = chi(i / 100.0);
        CHECK(v <= prev + 1e-15); // monotone decreasing
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
    CHECK(chi(0.5) == doctest::Approx(0.5).epsilon(1e-12)); // symmetric transition
}

TEST_CASE("cutoff_phi: inactive, saturated and intermediate regimes") {
    GridSpec g(1, 24, 8);
    NoiseModel m = NoiseModel::build(g, basic_cfg(2));

    auto const_velocity = [&](double mag) {
        SpectralVectorField u = SpectralVectorField::zeros(g);
        u.comp[0] = SpectralField::from_physical(g, std::vector<double>(g.points(), mag));
        return u;
    };

    // |u| <= 1/eps everywhere -> unchanged
    {
        auto cut = cutoff_phi(m, const_velocity(0.5), 0.5); // 1/eps = 2
        for (int k = 0; k < m.K(); ++k) CHECK((cut[k] - m.phi()[k]).l2norm() < 1e-13);
    }
    // |u| >= 1/eps + 1 everywhere -> zero fields
    {
        auto cut = cutoff_phi(m, const_velocity(3.5), 0.5);
        for (int k = 0; k < m.K(); ++k) CHECK(cut[k].l2norm() < 1e-13);
    }
    // intermediate plateau: strictly between, monotone in |u|
    {
        auto mid1 = cutoff_phi(m, const_velocity(2.3), 0.5);
        auto mid2 = cutoff_phi(m, const_velocity(2.7), 0.5);
        const double r1 = mid1[0].l2norm() / m.phi()[0].l2norm();
        const double r2 = mid2[0].l2norm() / m.phi()[0].l2norm();
        CHECK(r1 > 0.0);
        CHECK(r1 < 1.0);
        CHECK(r2 < r1);
    }
    // eps <= 0 disables the cut-off
    {
        auto cut = cutoff_phi(m, const_velocity(100.0), 0.0);
        for (int k = 0; k < m.K(); ++k) CHECK((cut[k] - m.phi()[k]).l2norm() < 1e-13);
    }
}

TEST_CASE("cutoff never increases the pointwise magnitude") {
    GridSpec g(1, 24, 8);
    NoiseModel m = NoiseModel::build(g, basic_cfg(3));
    std::vector<double> ramp(g.points());
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 4.0 * std::sin(2 * 3.14159 * i / ramp.size());
    SpectralVectorField u = SpectralVectorField::zeros(g);
    u.comp[0] = SpectralField::from_physical(g, std::move(ramp));
    auto cut = cutoff_phi(m, u, 0.5);
    for (int k = 0; k < m.K(); ++k)
        for (std::size_t i = 0; i < g.points(); ++i)
            CHECK(std::abs(cut[k].comp[0].phys()[i]) <=
                  std::abs(m.phi()[k].comp[0].phys()[i]) + 1e-14);
}

TEST_CASE("noise coefficient bound against the density mass") {
    // || sqrt(rho) phi ||^2 <= budget * ||rho||_L1 for rho >= 0
    GridSpec g(1, 24, 8);
    NoiseModel m = NoiseModel::build(g, basic_cfg(4));
    std::vector<double> rho(g.points());
    rng::GaussianStream gs(5);
    for (auto& r : rho) r = std::abs(gs.next()) + 0.1;
    SpectralField rho_f = SpectralField::from_physical(g, rho);
    double lhs = 0.0;
    for (const auto& f : m.phi())
        for (int c = 0; c < f.dim(); ++c)
            lhs += l2_inner(SpectralField::multiply(rho_f, f.comp[c]), f.comp[c]);
    CHECK(lhs <= m.hs_budget() * rho_f.integral() + 1e-12);
}

TEST_CASE("auxiliary-space norm") {
    CHECK(u0_norm({}) == 0.0);
    CHECK(u0_norm({0.0, 0.0, 0.0}) == 0.0);
    CHECK(u0_norm({1.0}) == 1.0);
    // alpha_k = 1 for k <= 10: direct partial-sum oracle
    double s = 0.0;
    for (int k = 1; k <= 10; ++k) s += 1.0 / (k * k);
    CHECK(u0_norm(std::vector<double>(10, 1.0)) == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
    CHECK(u0_norm(std::vector<double>(10, 1.0)) == doctest::Approx(1.2449).epsilon(1e-4));
}

TEST_CASE("seed derivation separates streams") {
    const std::uint64_t a = rng::derive_seed(42, {1});
    const std::uint64_t b = rng::derive_seed(42, {2});
    const std::uint64_t c = rng::derive_seed(43, {1});
    CHECK(a != b);
    CHECK(a != c);
    CHECK(a == rng::derive_seed(42, {1}));
}

} // TEST_SUITE

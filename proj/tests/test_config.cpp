#include <doctest.h>

#include "eulermv/config.hpp"

using namespace eulermv;

TEST_SUITE("config") {

TEST_CASE("minimal config parses with defaults filled") {
    ParseOutcome out = parse_config("[run]\nkind = simulate\n");
    REQUIRE(out.ok);
    CHECK(out.config.kind == "simulate");
    CHECK(out.config.points == 64);
    CHECK(out.config.gamma == 1.4);
    CHECK(out.config.noise.K == 0);
}

TEST_CASE("the 2/3 rule violation is reported by name") {
    ParseOutcome out = parse_config("[grid]\npoints = 64\nmodes = 32\n");
    REQUIRE(!out.ok);
    bool found = false;
    for (const auto& e : out.errors)
        if (e.find("2/3") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("unknown sections and keys are rejected") {
    ParseOutcome out = parse_config("[nonsense]\nfoo = 1\n[grid]\nbar = 2\n");
    REQUIRE(!out.ok);
    bool unknown_section = false, unknown_key = false;
    for (const auto& e : out.errors) {
        if (e.find("unknown section") != std::string::npos) unknown_section = true;
        if (e.find("unknown key 'bar'") != std::string::npos) unknown_key = true;
    }
    CHECK(unknown_section);
    CHECK(unknown_key);
}

TEST_CASE("all errors are reported, not just the first") {
    ParseOutcome out = parse_config(
        "[run]\nkind = bogus\n[grid]\npoints = 15\nmodes = 32\n[thermo]\ngamma = 0.5\n");
    REQUIRE(!out.ok);
    CHECK(out.errors.size() >= 3);
}

TEST_CASE("type errors carry the key name and line") {
    ParseOutcome out = parse_config("[solver]\nh = fast\n");
    REQUIRE(!out.ok);
    CHECK(out.errors[0].find("h") != std::string::npos);
    CHECK(out.errors[0].find("line 2") != std::string::npos);
}

TEST_CASE("comments and blank lines are ignored") {
    ParseOutcome out = parse_config(
        "# header comment\n\n[run]\nkind = simulate # trailing comment\n\n");
    CHECK(out.ok);
}

TEST_CASE("emit/parse round trip reproduces the configuration") {
    ParseOutcome first = parse_config(
        "[run]\nkind = ensemble\nhorizon = 0.125\nseed = 987\n"
        "[grid]\ndim = 2\npoints = 24\nmodes = 8\n"
        "[noise]\nK = 3\nsigma = 0.25\nfamily = cosine\n"
        "[solver]\nh = 0.0005\neps_visc = 1e-4\n"
        "[initial]\nfamily = density-pulse\namplitude = 0.125\n"
        "[ensemble]\nn_paths = 64\n");
    REQUIRE(first.ok);
    const std::string text = emit_config(first.config);
    ParseOutcome second = parse_config(text);
    REQUIRE(second.ok);
    CHECK(emit_config(second.config) == text);
    CHECK(second.config.horizon == first.config.horizon);
    CHECK(second.config.noise.sigma == first.config.noise.sigma);
    CHECK(second.config.n_paths == first.config.n_paths);
}

TEST_CASE("keys outside a section are rejected") {
    ParseOutcome out = parse_config("kind = simulate\n");
    REQUIRE(!out.ok);
    CHECK(out.errors[0].find("outside any section") != std::string::npos);
}

TEST_CASE("derived objects are consistent") {
    ParseOutcome out = parse_config("[grid]\ndim = 2\npoints = 18\nmodes = 6\n[thermo]\ngamma = 2\n");
    REQUIRE(out.ok);
    GridSpec g = out.config.grid();
    CHECK(g.dim == 2);
    CHECK(g.n == 18);
    ThermoParams par = out.config.thermo();
    CHECK(par.c_v == doctest::Approx(1.0));
    SolverConfig s = out.config.solver();
    CHECK(s.thermo.gamma == 2.0);
}

} // TEST_SUITE

#include "eulermv/initial.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace eulermv {

namespace {

// samples f(x_0) constant across the remaining axes
std::vector<double> axis0_profile(const GridSpec& g, const std::function<double(double)>& f) {
    std::vector<double> out(g.points());
    const std::size_t stride = g.points() / static_cast<std::size_t>(g.n);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t i0 = i / stride;
        out[i] = f(g.length[0] * static_cast<double>(i0) / g.n);
    }
    return out;
}

} // namespace

double sound_speed(const InitialParams& p, const ThermoParams& par) {
    const double theta_bar = std::exp((p.s_bar + std::log(p.rho_bar)) / par.c_v);
    const double pbar = p.rho_bar * theta_bar;
    return std::sqrt(par.gamma * pbar / p.rho_bar);
}

FluidState initial_condition(const InitialParams& p, const GridSpec& grid, const SolverConfig& cfg) {
    grid.validate();
    if (!(p.rho_bar > 0.0)) throw ConfigError("initial: rho_bar must be positive");
    const double two_pi = 2.0 * std::numbers::pi;
    const ThermoParams& par = cfg.thermo;

    SpectralField rho = SpectralField::zeros(grid);
    SpectralVectorField u = SpectralVectorField::zeros(grid);
    SpectralField S = SpectralField::zeros(grid);

    if (p.family == "stationary") {
        rho = SpectralField::from_physical(grid, std::vector<double>(grid.points(), p.rho_bar));
        S = SpectralField::from_physical(grid,
                                         std::vector<double>(grid.points(), p.rho_bar * p.s_bar));
    } else if (p.family == "density-pulse") {
        if (p.mode > grid.modes) throw ConfigError("initial: pulse mode outside the Galerkin band");
        auto prof = axis0_profile(grid, [&](double x) {
            return p.rho_bar * (1.0 + p.amplitude * std::cos(two_pi * p.mode * x / grid.length[0]));
        });
        rho = SpectralField::from_physical(grid, std::move(prof));
        std::vector<double> s(grid.points());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = rho.phys()[i] * p.s_bar;
        S = SpectralField::from_physical(grid, std::move(s));
    } else if (p.family == "isentropic-wave") {
        if (p.mode > grid.modes) throw ConfigError("initial: wave mode outside the Galerkin band");
        const double c = sound_speed(p, par);
        auto rprof = axis0_profile(grid, [&](double x) {
            return p.rho_bar * (1.0 + p.amplitude * std::cos(two_pi * p.mode * x / grid.length[0]));
        });
        rho = SpectralField::from_physical(grid, std::move(rprof));
        auto uprof = axis0_profile(grid, [&](double x) {
            return c * p.amplitude * std::cos(two_pi * p.mode * x / grid.length[0]);
        });
        u.comp[0] = SpectralField::from_physical(grid, std::move(uprof));
        std::vector<double> s(grid.points());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = rho.phys()[i] * p.s_bar;
        S = SpectralField::from_physical(grid, std::move(s));
    } else if (p.family == "oscillation-pair") {
        rho = SpectralField::from_physical(grid, std::vector<double>(grid.points(), p.rho_bar));
        const std::size_t stride = grid.points() / static_cast<std::size_t>(grid.n);
        std::vector<double> m0(grid.points());
        for (std::size_t i = 0; i < m0.size(); ++i) {
            const std::size_t i0 = i / stride;
            m0[i] = (i0 % 2 == 0 ? p.amplitude : -p.amplitude);
        }
        S = SpectralField::from_physical(grid,
                                         std::vector<double>(grid.points(), p.rho_bar * p.s_bar));
        // the alternating pattern is the Nyquist mode; it is stored verbatim
        // in the momentum (no band projection) because the defect oracles
        // consume the raw samples
        FluidState st;
        st.rho = rho;
        st.S = S;
        st.mom.comp.push_back(SpectralField::from_physical(grid, std::move(m0)));
        for (int a = 1; a < grid.dim; ++a) st.mom.comp.push_back(SpectralField::zeros(grid));
        return st;
    } else {
        throw ConfigError("initial: unknown family '" + p.family + "'");
    }
    return make_state(rho, u, S, cfg);
}

} // namespace eulermv

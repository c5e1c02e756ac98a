#pragma once

// Analytic initial-condition families.
//   stationary       constant (rho_bar, u = 0, S = rho_bar * s_bar)
//   density-pulse    rho = rho_bar (1 + A cos(2 pi k x_0 / L)), u = 0, s = s_bar
//   isentropic-wave  small right-moving acoustic wave on the stationary state,
//                    velocity amplitude c*A with sound speed c^2 = gamma p/rho
//   oscillation-pair sign-alternating momentum (+a, -a, ...) along axis 0 on
//                    constant (rho_bar, s_bar); the two-value defect instance

#include <string>

#include "eulermv/scheme.hpp"

namespace eulermv {

struct InitialParams {
    std::string family = "stationary";
    double rho_bar = 1.0;
    double s_bar = 0.0;
    double amplitude = 0.0;
    int mode = 1;
};

FluidState initial_condition(const InitialParams& p, const GridSpec& grid, const SolverConfig& cfg);

// background sound speed c^2 = gamma p(rho_bar, theta_bar)/rho_bar of the family
double sound_speed(const InitialParams& p, const ThermoParams& par);

} // namespace eulermv

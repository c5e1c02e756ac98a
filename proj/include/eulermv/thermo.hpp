#pragma once

// Ideal-gas closures in both (rho, theta) and conservative (rho, S) variables.
// p = rho*theta, e = c_v*theta with c_v = 1/(gamma-1), s = c_v*log(theta) - log(rho),
// and in conservative variables p(rho, S) = rho^gamma * exp(S/(c_v rho)).

#include <utility>

#include "eulermv/errors.hpp"

namespace eulermv {

struct ThermoParams {
    double gamma = 1.4;
    double c_v = 1.0 / 0.4;

    ThermoParams() = default;
    explicit ThermoParams(double gamma_);
};

struct ThermoPoint {
    double rho;
    double theta;
};

namespace thermo {

// Exponent cap for exp(S/(c_v rho)); beyond it evaluation is refused rather
// than returning inf.
inline constexpr double kExpCap = 700.0;

double pressure_rt(const ThermoPoint& pt);                     // rho * theta
double internal_energy(const ThermoPoint& pt, const ThermoParams& par); // c_v * theta
double entropy(const ThermoPoint& pt, const ThermoParams& par);         // specific entropy s
double pressure_conservative(double rho, double S, const ThermoParams& par);
// theta recovered from conservative variables: S = rho * s(rho, theta)
double temperature_from_conservative(double rho, double S, const ThermoParams& par);

// H_Theta(rho, theta) = rho e - Theta rho s
double ballistic_free_energy(const ThermoPoint& pt, double Theta, const ThermoParams& par);
// d/drho of H_Theta evaluated along theta = Theta
double ballistic_drho(double r, double Theta, const ThermoParams& par);

// Central finite-difference residuals of the Gibbs relation,
// (theta ds/drho - (de/drho + p d(1/rho)/drho), theta ds/dtheta - de/dtheta).
std::pair<double, double> gibbs_residual(const ThermoPoint& pt, const ThermoParams& par);

// p / (1 + rho + rho e + theta |s|), diagnostic ratio
double pressure_hypothesis_check(const ThermoPoint& pt, const ThermoParams& par);

} // namespace thermo
} // namespace eulermv

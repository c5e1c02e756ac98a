#include "eulermv/thermo.hpp"

#include <cmath>
#include <string>

namespace eulermv {

ThermoParams::ThermoParams(double gamma_) : gamma(gamma_), c_v(1.0 / (gamma_ - 1.0)) {
    if (!(gamma_ > 1.0)) throw ConfigError("thermo: gamma must exceed 1 (got " + std::to_string(gamma_) + ")");
}

namespace thermo {

namespace {
void require_positive(const ThermoPoint& pt, const char* where) {
    if (!(pt.rho > 0.0) || !(pt.theta > 0.0))
        throw DomainError(std::string(where) + ": rho and theta must be strictly positive");
}
} // namespace

double pressure_rt(const ThermoPoint& pt) {
    require_positive(pt, "pressure_rt");
    return pt.rho * pt.theta;
}

double internal_energy(const ThermoPoint& pt, const ThermoParams& par) {
    require_positive(pt, "internal_energy");
    return par.c_v * pt.theta;
}

double entropy(const ThermoPoint& pt, const ThermoParams& par) {
    require_positive(pt, "entropy");
    return par.c_v * std::log(pt.theta) - std::log(pt.rho);
}

double pressure_conservative(double rho, double S, const ThermoParams& par) {
    if (!(rho > 0.0)) throw DomainError("pressure_conservative: rho must be strictly positive");
    const double expo = S / (par.c_v * rho);
    if (expo > kExpCap)
        throw DomainError("pressure_conservative: exponent " + std::to_string(expo) +
                          " exceeds the cap " + std::to_string(kExpCap));
    return std::exp(par.gamma * std::log(rho) + expo);
}

double temperature_from_conservative(double rho, double S, const ThermoParams& par) {
    if (!(rho > 0.0)) throw DomainError("temperature_from_conservative: rho must be positive");
    // S = rho (c_v log theta - log rho)
    return std::exp((S / rho + std::log(rho)) / par.c_v);
}

double ballistic_free_energy(const ThermoPoint& pt, double Theta, const ThermoParams& par) {
    require_positive(pt, "ballistic_free_energy");
    if (!(Theta > 0.0)) throw DomainError("ballistic_free_energy: Theta must be positive");
    const double e = par.c_v * pt.theta;
    const double s = entropy(pt, par);
    return pt.rho * e - Theta * pt.rho * s;
}

double ballistic_drho(double r, double Theta, const ThermoParams& par) {
    if (!(r > 0.0) || !(Theta > 0.0)) throw DomainError("ballistic_drho: positive inputs required");
    const double s = par.c_v * std::log(Theta) - std::log(r);
    return (par.c_v + 1.0) * Theta - Theta * s;
}

std::pair<double, double> gibbs_residual(const ThermoPoint& pt, const ThermoParams& par) {
    require_positive(pt, "gibbs_residual");
    auto e_of = [&](double rho, double theta) { return internal_energy({rho, theta}, par); };
    auto s_of = [&](double rho, double theta) { return entropy({rho, theta}, par); };

    const double hr = 1e-6 * std::max(1.0, std::abs(pt.rho));
    const double ht = 1e-6 * std::max(1.0, std::abs(pt.theta));
    const double p = pressure_rt(pt);

    const double ds_drho = (s_of(pt.rho + hr, pt.theta) - s_of(pt.rho - hr, pt.theta)) / (2 * hr);
    const double de_drho = (e_of(pt.rho + hr, pt.theta) - e_of(pt.rho - hr, pt.theta)) / (2 * hr);
    const double dinv_drho = (1.0 / (pt.rho + hr) - 1.0 / (pt.rho - hr)) / (2 * hr);
    const double r1 = pt.theta * ds_drho - (de_drho + p * dinv_drho);

    const double ds_dtheta = (s_of(pt.rho, pt.theta + ht) - s_of(pt.rho, pt.theta - ht)) / (2 * ht);
    const double de_dtheta = (e_of(pt.rho, pt.theta + ht) - e_of(pt.rho, pt.theta - ht)) / (2 * ht);
    const double r2 = pt.theta * ds_dtheta - de_dtheta;

    return {r1, r2};
}

double pressure_hypothesis_check(const ThermoPoint& pt, const ThermoParams& par) {
    require_positive(pt, "pressure_hypothesis_check");
    const double p = pressure_rt(pt);
    const double e = internal_energy(pt, par);
    const double s = entropy(pt, par);
    return p / (1.0 + pt.rho + pt.rho * e + pt.theta * std::abs(s));
}

} // namespace thermo
} // namespace eulermv

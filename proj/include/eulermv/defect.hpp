#pragma once

// ============================================================================
// Defect and Young-measure estimation by coarse graining.
//
// A refined solution is block-averaged onto a coarse grid. What the averaging
// loses from the nonlinear fluxes is kept as cell densities:
//   R_conv = avg(m (x) m / rho) - avg(m) (x) avg(m) / avg(rho)   (PSD by
//            Cauchy-Schwarz),
//   R_press = avg(p(rho, S)) - p(avg rho, avg S)                 (>= 0 by
//            convexity of p in (rho, S)),
// and the per-cell empirical distribution of fine triples (rho', m', S') is
// the Young measure V with uniform weights.
//
// The weak-form residual checks evaluate the coarse trajectory against the
// measure-valued solution relations (continuity, momentum with defect
// integrals, clamped entropy inequality, defect-augmented energy identity).
//
// Quadrature convention: a coarse sample with index j is the average of the
// fine block starting at x_j, i.e. it represents the block CENTER
// x_j + (factor/2) dx_fine. Test functions passed to the residual checks
// must therefore be sampled at block centers; the pairings are then midpoint
// quadratures and the identities close to second order in the cell size.
// ============================================================================

#include <array>
#include <vector>

#include "eulermv/noise.hpp"
#include "eulermv/scheme.hpp"
#include "eulermv/thermo.hpp"

namespace eulermv {

struct DefectEstimate {
    GridSpec coarse;
    int factor = 1;
    // per coarse cell, row-major over the coarse grid; d*d entries used
    std::vector<std::array<double, 9>> r_conv;
    std::vector<double> r_press;

    struct Atom {
        double rho;
        std::array<double, 3> m;
        double S;
        double w;
    };
    std::vector<std::vector<Atom>> young;

    double rconv_trace_integral() const;  // int tr R_conv dx
    double rpress_integral() const;       // int R_press dx
    double min_rconv_eigenvalue() const;  // min over cells of lambda_min
    double min_rpress() const;
};

struct CoarseGrained {
    FluidState coarse;
    DefectEstimate defects;
};

// factor must divide N and leave an even coarse grid; avg(rho) must stay
// above the floor of 0.
CoarseGrained coarse_grain(const FluidState& fine, int factor, const ThermoParams& par);

struct CoarseTrajectory {
    std::vector<double> times;
    std::vector<FluidState> states;
    std::vector<DefectEstimate> defects;
    // trapezoid-accumulated time integrals of S and of the defect densities,
    // the continuous-in-time variables consumed by the path-law machinery
    std::vector<SpectralField> S_int;
    std::vector<std::vector<double>> rpress_int;
    std::vector<std::vector<std::array<double, 9>>> rconv_int;
};

CoarseTrajectory coarse_grain_trajectory(const Trajectory& fine, int factor, const ThermoParams& par);

// [int rho psi]_0^tau - int_0^tau int m.grad(psi), trapezoid in time;
// one value per trajectory time.
std::vector<double> continuity_residual(const CoarseTrajectory& ct, const SpectralField& psi);

// Weak momentum identity residual including (optionally) the defect
// integrals and the realized noise increments. Throws ConfigError when
// include_defects is requested but the trajectory carries none.
std::vector<double> momentum_residual(const CoarseTrajectory& ct, const NoiseModel& noise,
                                      const WienerPath& path, const SpectralVectorField& phi,
                                      const ThermoParams& par, bool include_defects);

// Clamped entropy inequality: returns lhs - rhs per time (<= tol expected)
// for Z_c(s) = clamp(s, -c, c) and a static test function phi >= 0.
std::vector<double> entropy_inequality_residual(const CoarseTrajectory& ct, double clamp_level,
                                                const SpectralField& phi);

// Residual of the defect-augmented total energy identity per consecutive
// snapshot pair (first entry 0).
std::vector<double> energy_identity_residual(const CoarseTrajectory& ct, const NoiseModel& noise,
                                             const WienerPath& path, const ThermoParams& par,
                                             bool include_defects);

// Young-measure pairing <V(cell); g> as a cell-indexed vector.
std::vector<double> young_pairing(const DefectEstimate& d,
                                  double (*g)(double rho, const double* m, double S, int dim));

double min_symmetric_eigenvalue(const std::array<double, 9>& a, int dim);

} // namespace eulermv

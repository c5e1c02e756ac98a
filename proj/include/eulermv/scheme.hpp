#pragma once

// ============================================================================
// Frozen-velocity collocation scheme for the regularized system on the torus.
//
// One macro step of size h, coefficients frozen at the left endpoint t_n:
//   1. rho, S advance through conservative transport with velocity [u_n]_R,
//      RK4 on the dealiased spectral right-hand side;
//   2. the Galerkin momentum q = Pi_m(rho u) advances by
//        dq = -Pi_m[div(rho_n [u_n]_R (x) u_n)] dt
//             - chi(||u_n|| - R) Pi_m[grad p(rho_n, S_n)] dt
//             + eps Pi_m[L u] dt  (+ noise),
//      where the stiff diagonal regularizer term is integrated through the
//      interval with RK4 substeps and the forcing enters as an explicit
//      Ito increment sum_k Pi_m[rho_n phi_eps,k] dW_k;
//   3. the velocity is recovered from q through the mass operator at the
//      updated density (conjugate gradients on the band).
//
// Positivity is enforced by rejection: a step that pulls the density under
// rho_floor is retried on dyadically halved intervals, with the Wiener
// increment split by a deterministic Brownian bridge, down to h_min.
// ============================================================================

#include <cstdint>
#include <string>
#include <vector>

#include "eulermv/field.hpp"
#include "eulermv/noise.hpp"
#include "eulermv/thermo.hpp"

namespace eulermv {

struct FluidState {
    SpectralField rho;       // density, band-limited
    SpectralVectorField mom; // Galerkin momentum Pi_m(rho u)
    SpectralField S;         // total entropy rho*s, band-limited
    double time = 0.0;
};

struct SolverConfig {
    double h = 1e-3;
    int substeps = 0; // RK4 substeps per macro step; 0 = automatic from stiffness
    double eps_visc = 0.0;
    double R_cutoff = 1e6;
    double eps_noise = 0.0;
    ThermoParams thermo;
    double mass_solver_tol = 1e-10;
    double rho_floor = 1e-8;
    double h_min = 1e-9;
    bool upwind_transport = false; // finite-volume fallback for steep data

    void validate() const;
};

// One bookkeeping row per accepted (leaf) step. `eps_uu` stores
// eps*((u,u)), `ito` the rate (1/2) sum_k int rho |Pi_m phi_eps,k|^2 dx, both
// at the row's state; `stoch_inc` and `residual` refer to the step that
// produced the row.
struct LedgerRow {
    double t = 0.0;
    double e_kin = 0.0;
    double e_int = 0.0;
    double eps_uu = 0.0;
    double ito = 0.0;
    double stoch_inc = 0.0;
    double residual = 0.0;
};

struct EnergyLedger {
    std::vector<LedgerRow> rows;
};

// Discrete weak-form budget of the momentum equation against one band-limited
// test field, accumulated along a run at snapshot times. The martingale part
// is m_phi(t) - m_phi(0) - flux_int(t); its realized noise sum, quadratic
// variation integral and per-mode cross integrals are kept alongside.
struct WeakBudget {
    SpectralVectorField phi;
    std::vector<double> mom_phi;              // int m.phi dx at snapshots
    std::vector<double> flux_int;             // accumulated drift quadrature
    std::vector<double> stoch_int;            // accumulated noise increments
    std::vector<double> qv_int;               // accumulated sum_k h (int rho phi_k.phi)^2
    std::vector<std::vector<double>> psi_int; // [mode][snapshot] accumulated h int rho phi_k.phi
};

struct TrajectoryOptions {
    double horizon = 0.0;
    double snapshot_interval = 0.0; // 0 = only first/last
    std::uint64_t seed = 0;
    std::vector<SpectralVectorField> budget_phis;
    bool transport_only = false; // velocity frozen at t=0, momentum step skipped
};

struct Trajectory {
    std::vector<FluidState> snaps;
    EnergyLedger ledger;
    WienerPath path; // increments actually consumed, macro resolution
    std::vector<WeakBudget> budgets;
    std::vector<double> energy_qv; // accumulated sum_k h (int m.phi_eps,k)^2 at snapshots
    std::vector<std::vector<double>> beta; // [mode][snapshot] Brownian path values
    bool failed = false;
    std::string failure;

    const FluidState& back() const { return snaps.back(); }
};

// ---- elementary operations --------------------------------------------------

// [u]_R = chi(||u||_{L2} - R) u
SpectralVectorField velocity_cutoff(const SpectralVectorField& u, double R);

// Advances d_t f + div(f u_frozen) = 0 over h with `substeps` RK4 stages on
// the band-limited right-hand side. Exactly preserves int f dx.
SpectralField transport_step(const SpectralField& f, const SpectralVectorField& u_frozen, double h,
                             int substeps, int band);

// Solves Pi_m(rho v) = rhs for v in the band by conjugate gradients.
// Throws NumericalError on non-convergence (message carries the residual).
SpectralVectorField mass_operator_solve(const SpectralField& rho, const SpectralVectorField& rhs,
                                        double tol, int band);

// Pointwise p(rho, S) = rho^gamma exp(S/(c_v rho)) as a field.
SpectralField pressure_field(const SpectralField& rho, const SpectralField& S,
                             const ThermoParams& par);

// Full momentum update over [t, t+h] given the already-transported density;
// returns the new velocity. dW holds one increment per retained noise mode.
SpectralVectorField momentum_step(const FluidState& state, const SpectralField& rho_next,
                                  const SolverConfig& cfg, const NoiseModel& noise,
                                  const std::vector<double>& dW);

SpectralVectorField recover_velocity(const FluidState& state, const SolverConfig& cfg);

// Pi_m(rho u) for a given velocity (the scheme's momentum variable).
SpectralVectorField galerkin_momentum(const SpectralField& rho, const SpectralVectorField& u,
                                      int band);

FluidState make_state(const SpectralField& rho, const SpectralVectorField& u,
                      const SpectralField& S, const SolverConfig& cfg);

// ---- trajectory driver --------------------------------------------------------

Trajectory run_trajectory(const FluidState& initial, const SolverConfig& cfg,
                          const NoiseModel& noise, const TrajectoryOptions& opt);

} // namespace eulermv

#pragma once

// ============================================================================
// Monte-Carlo trajectory ensembles and martingale-problem statistics.
//
// For a test field phi the process
//   M_t(phi) = [int m.phi]_0^t - int_0^t (drift quadrature) dt
// collected along each path must be a mean-zero martingale with quadratic
// variation Q_t = sum_k int_0^t (int rho phi_eps,k . phi dx)^2 dt and
// cross-variation <M, beta_k>_t = int_0^t int rho phi_eps,k . phi dx dt.
// The report tests mean-zero, the Ito isometry E[M^2 - Q] = 0 and the
// cross-variation match at a family-wise 3-sigma level, Bonferroni-split
// across report times.
// ============================================================================

#include <cstdint>
#include <string>
#include <vector>

#include "eulermv/noise.hpp"
#include "eulermv/scheme.hpp"
#include "eulermv/stats.hpp"

namespace eulermv {

struct EnsembleSpec {
    int n_paths = 0;
    std::uint64_t base_seed = 0;
    SolverConfig cfg;
    NoiseModel noise;
    FluidState initial;
    TrajectoryOptions traj; // horizon, snapshot interval, budget test fields
    int threads = 1;
};

struct Ensemble {
    std::vector<Trajectory> paths; // index = path number; failed paths kept
    int n_failed = 0;
    std::vector<std::uint64_t> seeds;
};

// Runs n_paths independent trajectories with seeds split from base_seed.
// Failures are recorded per path; throws NumericalError when all fail.
Ensemble run_ensemble(const EnsembleSpec& spec);

inline constexpr int kMinPathsForStats = 30;

struct MartingaleRow {
    double t = 0.0;
    stats::Summary m;        // sample of M_t
    stats::Summary isometry; // sample of M_t^2 - Q_t
    std::vector<stats::Summary> cross; // per mode, sample of M_t beta_k - Psi_k
    bool pass_mean = true;
    bool pass_isometry = true;
    bool pass_cross = true;
};

struct MartingaleReport {
    std::vector<MartingaleRow> rows;
    double z_threshold = 3.0;
    bool pass = true;
};

// Statistics for the budget at `budget_index` of each trajectory. Refuses to
// run with fewer than kMinPathsForStats usable paths (ConfigError).
MartingaleReport martingale_stat(const Ensemble& ens, std::size_t budget_index);

// Same machinery for the energy process E_t - E_0 - int ito dt with
// quadratic variation sum_k int (int m.phi_eps,k)^2 dt.
MartingaleReport energy_martingale_stat(const Ensemble& ens);

// Optional filtration check: E[(M_t - M_s) h(past)] for h drawn from a fixed
// dictionary {1, tanh(M_s), tanh(beta_1(s))}. Returns one summary per h.
std::vector<stats::Summary> orthogonality_stat(const Ensemble& ens, std::size_t budget_index,
                                               std::size_t s_idx, std::size_t t_idx);

} // namespace eulermv

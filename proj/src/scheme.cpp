#include "eulermv/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eulermv/kernels.hpp"
#include "eulermv/rng.hpp"

namespace eulermv {

void SolverConfig::validate() const {
    if (!(h > 0.0)) throw ConfigError("solver: h must be positive");
    if (substeps < 0) throw ConfigError("solver: substeps must be nonnegative");
    if (eps_visc < 0.0) throw ConfigError("solver: eps_visc must be nonnegative");
    if (!(R_cutoff > 0.0)) throw ConfigError("solver: R_cutoff must be positive");
    if (!(mass_solver_tol > 0.0)) throw ConfigError("solver: mass_solver_tol must be positive");
    if (!(rho_floor > 0.0)) throw ConfigError("solver: rho_floor must be positive");
    if (!(h_min > 0.0) || h_min > h) throw ConfigError("solver: need 0 < h_min <= h");
}

namespace {

// Per-(grid, band) spectral tables: signed wavenumbers scaled by 2 pi / L,
// band mask, and the regularizer symbol sigma6 + 1.
struct BandTables {
    GridSpec g;
    int band = 0;
    std::vector<char> keep;
    std::vector<std::array<double, 3>> kappa;
    std::vector<double> visc; // sigma6(kappa) + 1 inside the band, 0 outside

    BandTables(const GridSpec& grid, int m) : g(grid), band(m) {
        const std::size_t ns = g.spec_size();
        keep.assign(ns, 0);
        kappa.assign(ns, {0.0, 0.0, 0.0});
        visc.assign(ns, 0.0);
        SpectralField probe = SpectralField::zeros(g);
        const double two_pi = 2.0 * std::numbers::pi;
        int k[3];
        for (std::size_t i = 0; i < ns; ++i) {
            probe.wavevector(i, k);
            bool in = true;
            for (int a = 0; a < g.dim; ++a)
                if (std::abs(k[a]) > m) in = false;
            keep[i] = in ? 1 : 0;
            if (!in) continue;
            double kap[3] = {0, 0, 0};
            for (int a = 0; a < g.dim; ++a) {
                kap[a] = two_pi * k[a] / g.length[a];
                kappa[i][a] = kap[a];
            }
            visc[i] = sigma6(kap, g.dim) + 1.0;
        }
    }
};

using Complex = std::complex<double>;

// -div(f u) restricted to the band; inputs and output are physical sample
// arrays, u passed as component pointers.
void transport_rhs(const BandTables& tb, const double* f, const std::vector<const double*>& u,
                   double* out, std::vector<double>& scratch_prod, std::vector<Complex>& scratch_spec,
                   std::vector<Complex>& acc) {
    const std::size_t np = tb.g.points();
    const std::size_t ns = tb.g.spec_size();
    std::fill(acc.begin(), acc.end(), Complex{0.0, 0.0});
    for (int a = 0; a < tb.g.dim; ++a) {
        kernels::mul(f, u[a], scratch_prod.data(), np);
        fft::forward(tb.g, scratch_prod.data(), scratch_spec.data());
        for (std::size_t i = 0; i < ns; ++i) {
            if (!tb.keep[i]) continue;
            acc[i] -= Complex(0.0, tb.kappa[i][a]) * scratch_spec[i];
        }
    }
    fft::backward(tb.g, acc.data(), out);
}

// RK4 substep count; the viscous stiffness only enters the momentum update,
// transport is limited by the advective CFL alone.
int auto_substeps(const BandTables& tb, const SolverConfig& cfg, double umax, double rho_min,
                  bool include_viscous) {
    if (cfg.substeps > 0) return cfg.substeps;
    const double two_pi = 2.0 * std::numbers::pi;
    double kmax_sum = 0.0, corner[3] = {0, 0, 0};
    for (int a = 0; a < tb.g.dim; ++a) {
        corner[a] = two_pi * tb.band / tb.g.length[a];
        kmax_sum += corner[a];
    }
    int n = 1;
    n = std::max(n, static_cast<int>(std::ceil(cfg.h * umax * kmax_sum / 2.0)));
    if (include_viscous && cfg.eps_visc > 0.0) {
        const double lam = cfg.eps_visc * (sigma6(corner, tb.g.dim) + 1.0) / std::max(rho_min, cfg.rho_floor);
        n = std::max(n, static_cast<int>(std::ceil(cfg.h * lam / 2.5)));
    }
    return std::min(n, 100000);
}

// First-order conservative upwind update (fallback for steep data).
std::vector<double> upwind_transport(const GridSpec& g, const std::vector<double>& f,
                                     const SpectralVectorField& u, double h) {
    const int n = g.n;
    const std::size_t np = g.points();
    double umax = 0.0;
    for (int c = 0; c < g.dim; ++c)
        umax = std::max(umax, std::max(std::abs(u.comp[c].min_value()), std::abs(u.comp[c].max_value())));
    const double dx = g.length[0] / n;
    int nsub = std::max(1, static_cast<int>(std::ceil(h * umax * g.dim / (0.9 * dx))));
    const double dt = h / nsub;

    std::vector<double> cur = f, next(np);
    std::array<std::size_t, 3> stride{};
    stride[g.dim - 1] = 1;
    for (int a = g.dim - 2; a >= 0; --a) stride[a] = stride[a + 1] * n;

    for (int s = 0; s < nsub; ++s) {
        next = cur;
        for (int a = 0; a < g.dim; ++a) {
            const double* ua = u.comp[a].phys().data();
            const double dxa = g.length[a] / n;
            for (std::size_t i = 0; i < np; ++i) {
                const int ia = static_cast<int>((i / stride[a]) % n);
                const std::size_t ip = i + (ia + 1 == n ? stride[a] * (1 - n) : stride[a]);
                const std::size_t im = i - (ia == 0 ? stride[a] * (1 - n) : stride[a]);
                const double up = 0.5 * (ua[i] + ua[ip]); // face i+1/2
                const double um = 0.5 * (ua[im] + ua[i]); // face i-1/2
                const double flux_p = up >= 0.0 ? up * cur[i] : up * cur[ip];
                const double flux_m = um >= 0.0 ? um * cur[im] : um * cur[i];
                next[i] -= dt / dxa * (flux_p - flux_m);
            }
        }
        cur.swap(next);
    }
    return cur;
}

SpectralVectorField mass_solve_impl(const SpectralField& rho, const SpectralVectorField& rhs,
                                    double tol, int band, const SpectralVectorField* guess) {
    const GridSpec& g = rho.grid();
    require_same_grid(g, rhs.grid(), "mass_operator_solve");
    const int d = rhs.dim();
    const std::size_t np = g.points();
    const std::size_t ns = g.spec_size();
    BandTables tb(g, band);

    auto apply = [&](const std::vector<std::vector<double>>& v, std::vector<std::vector<double>>& out,
                     std::vector<double>& prod, std::vector<Complex>& spec) {
        for (int c = 0; c < d; ++c) {
            kernels::mul(rho.phys().data(), v[c].data(), prod.data(), np);
            fft::forward(g, prod.data(), spec.data());
            for (std::size_t i = 0; i < ns; ++i)
                if (!tb.keep[i]) spec[i] = {0.0, 0.0};
            fft::backward(g, spec.data(), out[c].data());
        }
    };
    auto dot_all = [&](const std::vector<std::vector<double>>& a,
                       const std::vector<std::vector<double>>& b) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += kernels::dot(a[c].data(), b[c].data(), np);
        return s;
    };

    std::vector<std::vector<double>> x(d), r(d), p(d), Ap(d, std::vector<double>(np));
    std::vector<double> prod(np);
    std::vector<Complex> spec(ns);

    double bnorm2 = 0.0;
    for (int c = 0; c < d; ++c) bnorm2 += kernels::nrm2sq(rhs.comp[c].phys().data(), np);
    SpectralVectorField out = SpectralVectorField::zeros(g);
    if (bnorm2 == 0.0) return out;

    const double mean_rho = rho.mean();
    for (int c = 0; c < d; ++c) {
        if (guess)
            x[c] = guess->comp[c].phys();
        else {
            x[c].resize(np);
            kernels::scale(1.0 / mean_rho, rhs.comp[c].phys().data(), x[c].data(), np);
        }
    }
    apply(x, Ap, prod, spec);
    for (int c = 0; c < d; ++c) {
        r[c].resize(np);
        kernels::sub(rhs.comp[c].phys().data(), Ap[c].data(), r[c].data(), np);
        p[c] = r[c];
    }
    double rs = dot_all(r, r);
    const double stop2 = tol * tol * bnorm2;
    const int maxit = 20 * (2 * band + 1) * d + 50;
    int it = 0;
    while (rs > stop2) {
        if (++it > maxit)
            throw NumericalError("mass_operator_solve: no convergence after " + std::to_string(maxit) +
                                 " iterations, relative residual " + std::to_string(std::sqrt(rs / bnorm2)));
        apply(p, Ap, prod, spec);
        const double alpha = rs / dot_all(p, Ap);
        for (int c = 0; c < d; ++c) {
            kernels::axpy(alpha, p[c].data(), x[c].data(), np);
            kernels::axpy(-alpha, Ap[c].data(), r[c].data(), np);
        }
        const double rs_new = dot_all(r, r);
        const double beta = rs_new / rs;
        rs = rs_new;
        for (int c = 0; c < d; ++c)
            for (std::size_t i = 0; i < np; ++i) p[c][i] = r[c][i] + beta * p[c][i];
    }
    for (int c = 0; c < d; ++c) out.comp[c] = SpectralField::from_physical(g, std::move(x[c]));
    return out;
}

} // namespace

// ============================================================================
// Elementary operations
// ============================================================================

SpectralVectorField velocity_cutoff(const SpectralVectorField& u, double R) {
    const double s = chi(u.l2norm() - R);
    return u.scaled(s);
}

SpectralField transport_step(const SpectralField& f, const SpectralVectorField& u_frozen, double h,
                             int substeps, int band) {
    require_same_grid(f.grid(), u_frozen.grid(), "transport_step");
    const GridSpec& g = f.grid();
    BandTables tb(g, band);
    const std::size_t np = g.points();
    const std::size_t ns = g.spec_size();
    if (substeps < 1) substeps = 1;
    const double dt = h / substeps;

    std::vector<const double*> uptr(g.dim);
    for (int a = 0; a < g.dim; ++a) uptr[a] = u_frozen.comp[a].phys().data();

    std::vector<double> y = f.phys();
    std::vector<double> k1(np), k2(np), k3(np), k4(np), stage(np), prod(np);
    std::vector<Complex> spec(ns), acc(ns);

    for (int s = 0; s < substeps; ++s) {
        transport_rhs(tb, y.data(), uptr, k1.data(), prod, spec, acc);
        for (std::size_t i = 0; i < np; ++i) stage[i] = y[i] + 0.5 * dt * k1[i];
        transport_rhs(tb, stage.data(), uptr, k2.data(), prod, spec, acc);
        for (std::size_t i = 0; i < np; ++i) stage[i] = y[i] + 0.5 * dt * k2[i];
        transport_rhs(tb, stage.data(), uptr, k3.data(), prod, spec, acc);
        for (std::size_t i = 0; i < np; ++i) stage[i] = y[i] + dt * k3[i];
        transport_rhs(tb, stage.data(), uptr, k4.data(), prod, spec, acc);
        for (std::size_t i = 0; i < np; ++i)
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return SpectralField::from_physical(g, std::move(y));
}

SpectralVectorField mass_operator_solve(const SpectralField& rho, const SpectralVectorField& rhs,
                                        double tol, int band) {
    return mass_solve_impl(rho, rhs, tol, band, nullptr);
}

SpectralField pressure_field(const SpectralField& rho, const SpectralField& S,
                             const ThermoParams& par) {
    require_same_grid(rho.grid(), S.grid(), "pressure_field");
    const std::size_t np = rho.grid().points();
    std::vector<double> p(np);
    const double* r = rho.phys().data();
    const double* s = S.phys().data();
    for (std::size_t i = 0; i < np; ++i) {
        if (!(r[i] > 0.0)) throw DomainError("pressure_field: non-positive density sample");
        const double expo = s[i] / (par.c_v * r[i]);
        if (expo > thermo::kExpCap) throw DomainError("pressure_field: entropy exponent over the cap");
        p[i] = std::exp(par.gamma * std::log(r[i]) + expo);
    }
    return SpectralField::from_physical(rho.grid(), std::move(p));
}

SpectralVectorField galerkin_momentum(const SpectralField& rho, const SpectralVectorField& u,
                                      int band) {
    SpectralVectorField q;
    for (int c = 0; c < u.dim(); ++c)
        q.comp.push_back(SpectralField::multiply(rho, u.comp[c]).projected(band));
    return q;
}

FluidState make_state(const SpectralField& rho, const SpectralVectorField& u, const SpectralField& S,
                      const SolverConfig& cfg) {
    (void)cfg;
    const int band = rho.grid().modes;
    FluidState st;
    st.rho = rho.projected(band);
    st.S = S.projected(band);
    st.mom = galerkin_momentum(st.rho, u.projected(band), band);
    st.time = 0.0;
    return st;
}

SpectralVectorField recover_velocity(const FluidState& state, const SolverConfig& cfg) {
    return mass_operator_solve(state.rho, state.mom, cfg.mass_solver_tol, state.rho.grid().modes);
}

namespace {

// Drift pieces frozen at the interval's left endpoint.
struct FrozenDrift {
    SpectralVectorField F; // -Pi[div(rho uR (x) u)] - chi Pi[grad p]
    double chi_press = 0.0;
};

FrozenDrift frozen_drift(const SpectralField& rho, const SpectralField& S,
                         const SpectralVectorField& u, const SolverConfig& cfg, int band) {
    const GridSpec& g = rho.grid();
    FrozenDrift d;
    d.chi_press = chi(u.l2norm() - cfg.R_cutoff);
    SpectralVectorField uR = velocity_cutoff(u, cfg.R_cutoff);

    std::vector<std::vector<SpectralField>> T(g.dim);
    for (int i = 0; i < g.dim; ++i) {
        T[i].reserve(g.dim);
        SpectralField rho_uRi = SpectralField::multiply(rho, uR.comp[i]);
        for (int j = 0; j < g.dim; ++j) T[i].push_back(SpectralField::multiply(rho_uRi, u.comp[j]));
    }
    d.F = tensor_div(T).projected(band).scaled(-1.0);

    SpectralVectorField gp = grad(pressure_field(rho, S, cfg.thermo)).projected(band);
    d.F.axpy_inplace(-d.chi_press, gp);
    return d;
}

// Diagonal regularizer applied to a band-limited vector field.
SpectralVectorField apply_L(const BandTables& tb, const SpectralVectorField& u) {
    SpectralVectorField out;
    for (int c = 0; c < u.dim(); ++c) {
        std::vector<Complex> spec = u.comp[c].spec();
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= tb.keep[i] ? -tb.visc[i] : 0.0;
        out.comp.push_back(SpectralField::from_spectral(tb.g, std::move(spec)));
    }
    return out;
}

struct MomentumResult {
    SpectralVectorField u_next;
    SpectralVectorField q_next;
};

MomentumResult momentum_step_impl(const FluidState& state, const SpectralVectorField& u,
                                  const SpectralField& rho_next,
                                  const std::vector<SpectralVectorField>& phi_eps,
                                  const SolverConfig& cfg, double dt, const std::vector<double>& dW) {
    const GridSpec& g = state.rho.grid();
    const int band = g.modes;
    BandTables tb(g, band);
    FrozenDrift drift = frozen_drift(state.rho, state.S, u, cfg, band);

    SpectralVectorField q = state.mom;
    if (cfg.eps_visc == 0.0 || (q.l2sq() == 0.0 && drift.F.l2sq() == 0.0)) {
        q.axpy_inplace(dt, drift.F);
    } else {
        // only the diagonal regularizer is integrated inside the interval,
        // so the advective CFL does not enter here
        const int nsub = auto_substeps(tb, cfg, 0.0, state.rho.min_value(), true);
        const double ds = dt / nsub;
        SpectralVectorField ustage = u;
        auto rhs = [&](const SpectralVectorField& qs) {
            ustage = mass_solve_impl(state.rho, qs, cfg.mass_solver_tol, band, &ustage);
            SpectralVectorField r = apply_L(tb, ustage).scaled(cfg.eps_visc);
            r.axpy_inplace(1.0, drift.F);
            return r;
        };
        for (int s = 0; s < nsub; ++s) {
            SpectralVectorField k1 = rhs(q);
            SpectralVectorField y = q;
            y.axpy_inplace(0.5 * ds, k1);
            SpectralVectorField k2 = rhs(y);
            y = q;
            y.axpy_inplace(0.5 * ds, k2);
            SpectralVectorField k3 = rhs(y);
            y = q;
            y.axpy_inplace(ds, k3);
            SpectralVectorField k4 = rhs(y);
            q.axpy_inplace(ds / 6.0, k1);
            q.axpy_inplace(ds / 3.0, k2);
            q.axpy_inplace(ds / 3.0, k3);
            q.axpy_inplace(ds / 6.0, k4);
        }
    }

    for (std::size_t k = 0; k < phi_eps.size() && k < dW.size(); ++k) {
        if (dW[k] == 0.0) continue;
        SpectralVectorField forced = galerkin_momentum(state.rho, phi_eps[k], band);
        q.axpy_inplace(dW[k], forced);
    }

    MomentumResult out;
    out.u_next = mass_solve_impl(rho_next, q, cfg.mass_solver_tol, band, &u);
    out.q_next = std::move(q);
    return out;
}

} // namespace

SpectralVectorField momentum_step(const FluidState& state, const SpectralField& rho_next,
                                  const SolverConfig& cfg, const NoiseModel& noise,
                                  const std::vector<double>& dW) {
    SpectralVectorField u = recover_velocity(state, cfg);
    std::vector<SpectralVectorField> phi_eps = cutoff_phi(noise, u, cfg.eps_noise);
    return momentum_step_impl(state, u, rho_next, phi_eps, cfg, cfg.h, dW).u_next;
}

// ============================================================================
// Trajectory driver
// ============================================================================

namespace {

struct StepRates {
    double eps_uu = 0.0;
    double ito = 0.0;
    std::vector<double> psi;            // per mode: int rho Pi[phi_eps,k].u dx
    std::vector<SpectralVectorField> phi_eps;
};

StepRates left_rates(const SpectralField& rho, const SpectralVectorField& u, const NoiseModel& noise,
                     const SolverConfig& cfg, int band) {
    StepRates r;
    r.eps_uu = cfg.eps_visc > 0.0 ? cfg.eps_visc * sobolev_inner_3(u, u) : 0.0;
    r.phi_eps = cutoff_phi(noise, u, cfg.eps_noise);
    const GridSpec& g = rho.grid();
    const std::size_t np = g.points();
    const double cv = g.cell_volume();
    r.psi.assign(r.phi_eps.size(), 0.0);
    double ito = 0.0;
    for (std::size_t k = 0; k < r.phi_eps.size(); ++k) {
        SpectralVectorField pk = r.phi_eps[k].projected(band);
        double norm2 = 0.0, dotu = 0.0;
        for (int c = 0; c < pk.dim(); ++c) {
            norm2 += kernels::triple_dot(rho.phys().data(), pk.comp[c].phys().data(),
                                         pk.comp[c].phys().data(), np);
            dotu += kernels::triple_dot(rho.phys().data(), pk.comp[c].phys().data(),
                                        u.comp[c].phys().data(), np);
        }
        ito += norm2 * cv;
        r.psi[k] = dotu * cv;
    }
    r.ito = 0.5 * ito;
    return r;
}

double kinetic_energy(const SpectralField& rho, const SpectralVectorField& u) {
    const std::size_t np = rho.grid().points();
    std::vector<const double*> mp(u.dim());
    std::vector<std::vector<double>> mom(u.dim(), std::vector<double>(np));
    for (int c = 0; c < u.dim(); ++c) {
        kernels::mul(rho.phys().data(), u.comp[c].phys().data(), mom[c].data(), np);
        mp[c] = mom[c].data();
    }
    return 0.5 * kernels::kinetic_sum(mp.data(), u.dim(), rho.phys().data(), np) *
           rho.grid().cell_volume();
}

double internal_energy_total(const SpectralField& rho, const SpectralField& S,
                             const ThermoParams& par) {
    return par.c_v * pressure_field(rho, S, par).integral();
}

// Precomputed test-function data for the weak budgets.
struct BudgetData {
    SpectralVectorField phi;
    std::vector<std::vector<std::vector<double>>> dphi; // [i][j] = d_j phi_i samples
    std::vector<double> divphi;
};

BudgetData precompute_budget(const SpectralVectorField& phi) {
    BudgetData b;
    b.phi = phi;
    const int d = phi.dim();
    b.dphi.assign(d, std::vector<std::vector<double>>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) b.dphi[i][j] = phi.comp[i].derivative(j).phys();
    b.divphi.assign(phi.grid().points(), 0.0);
    for (int i = 0; i < d; ++i)
        for (std::size_t x = 0; x < b.divphi.size(); ++x) b.divphi[x] += b.dphi[i][i][x];
    return b;
}

} // namespace

Trajectory run_trajectory(const FluidState& initial, const SolverConfig& cfg, const NoiseModel& noise,
                          const TrajectoryOptions& opt) {
    cfg.validate();
    const GridSpec& g = initial.rho.grid();
    const int band = g.modes;

    Trajectory tr;
    const long steps = opt.horizon > 0.0 ? std::lround(opt.horizon / cfg.h) : 0;
    if (std::abs(steps * cfg.h - opt.horizon) > 1e-9 * std::max(1.0, std::abs(opt.horizon)))
        throw ConfigError("run_trajectory: horizon must be a multiple of h");
    long snap_every = steps;
    if (opt.snapshot_interval > 0.0) {
        snap_every = std::lround(opt.snapshot_interval / cfg.h);
        if (snap_every <= 0 || std::abs(snap_every * cfg.h - opt.snapshot_interval) > 1e-9)
            throw ConfigError("run_trajectory: snapshot interval must be a multiple of h");
    }
    if (snap_every <= 0) snap_every = 1;

    tr.path = sample_increments(noise, cfg.h > 0 ? cfg.h : 1.0, static_cast<int>(steps), opt.seed);

    FluidState state = initial;
    if (state.mom.comp.empty()) state.mom = SpectralVectorField::zeros(g);
    SpectralVectorField u = state.mom.l2sq() == 0.0 ? SpectralVectorField::zeros(g)
                                                    : recover_velocity(state, cfg);
    const SpectralVectorField u_init = u;
    const SpectralVectorField uR_init = velocity_cutoff(u_init, cfg.R_cutoff);

    // budgets
    std::vector<BudgetData> bdata;
    for (const auto& phi : opt.budget_phis) bdata.push_back(precompute_budget(phi.projected(band)));
    tr.budgets.resize(bdata.size());
    std::vector<double> flux_acc(bdata.size(), 0.0), stoch_acc(bdata.size(), 0.0),
        qv_acc(bdata.size(), 0.0);
    std::vector<std::vector<double>> psi_acc(bdata.size(), std::vector<double>(noise.K(), 0.0));
    double energy_qv_acc = 0.0;
    std::vector<double> beta_acc(noise.K(), 0.0);

    StepRates rates = left_rates(state.rho, u, noise, cfg, band);

    auto emit_ledger = [&](double t, double stoch_inc, bool first) {
        LedgerRow row;
        row.t = t;
        row.e_kin = kinetic_energy(state.rho, u);
        row.e_int = internal_energy_total(state.rho, state.S, cfg.thermo);
        row.eps_uu = rates.eps_uu;
        row.ito = rates.ito;
        row.stoch_inc = stoch_inc;
        if (!first) {
            const LedgerRow& prev = tr.ledger.rows.back();
            const double dt = t - prev.t;
            row.residual = (row.e_kin + row.e_int) - (prev.e_kin + prev.e_int) + dt * prev.eps_uu -
                           dt * prev.ito - stoch_inc;
        }
        tr.ledger.rows.push_back(row);
    };

    auto emit_snapshot = [&]() {
        tr.snaps.push_back(state);
        for (std::size_t b = 0; b < bdata.size(); ++b) {
            WeakBudget& wb = tr.budgets[b];
            if (wb.phi.comp.empty()) {
                wb.phi = bdata[b].phi;
                wb.psi_int.assign(noise.K(), {});
            }
            double mphi = 0.0;
            for (int c = 0; c < g.dim; ++c) mphi += l2_inner(state.mom.comp[c], bdata[b].phi.comp[c]);
            wb.mom_phi.push_back(mphi);
            wb.flux_int.push_back(flux_acc[b]);
            wb.stoch_int.push_back(stoch_acc[b]);
            wb.qv_int.push_back(qv_acc[b]);
            for (int k = 0; k < noise.K(); ++k) wb.psi_int[k].push_back(psi_acc[b][k]);
        }
        tr.energy_qv.push_back(energy_qv_acc);
        if (tr.beta.empty()) tr.beta.assign(noise.K(), {});
        for (int k = 0; k < noise.K(); ++k) tr.beta[k].push_back(beta_acc[k]);
    };

    emit_snapshot();
    emit_ledger(state.time, 0.0, true);

    const int max_depth =
        std::max(0, static_cast<int>(std::floor(std::log2(cfg.h / cfg.h_min))));
    const std::size_t np = g.points();
    const double cellvol = g.cell_volume();

    // One leaf step of size dt with increment dW. Uses `rates` (left-endpoint
    // data) and refreshes it for the next leaf.
    auto leaf_step = [&](double dt, const std::vector<double>& dW) {
        const SpectralVectorField& u_used = opt.transport_only ? u_init : u;
        const SpectralVectorField uR =
            opt.transport_only ? uR_init : velocity_cutoff(u_used, cfg.R_cutoff);

        double umax = 0.0;
        for (int c = 0; c < g.dim; ++c)
            umax = std::max(umax, std::max(std::abs(u_used.comp[c].min_value()),
                                           std::abs(u_used.comp[c].max_value())));
        BandTables tb(g, band);
        const int nsub = auto_substeps(tb, cfg, umax, state.rho.min_value(), false);

        SpectralField rho1 = cfg.upwind_transport
                                 ? SpectralField::from_physical(
                                       g, upwind_transport(g, state.rho.phys(), uR, dt))
                                       .projected(band)
                                 : transport_step(state.rho, uR, dt, nsub, band);
        if (rho1.min_value() < cfg.rho_floor)
            throw StepRejection("transport: density fell under the floor " +
                                std::to_string(cfg.rho_floor));
        SpectralField S1 = cfg.upwind_transport
                               ? SpectralField::from_physical(
                                     g, upwind_transport(g, state.S.phys(), uR, dt))
                                     .projected(band)
                               : transport_step(state.S, uR, dt, nsub, band);

        // budget increments from left-endpoint quadrature
        const double chi_press = chi(u_used.l2norm() - cfg.R_cutoff);
        SpectralField pfield = pressure_field(state.rho, state.S, cfg.thermo);
        for (std::size_t b = 0; b < bdata.size(); ++b) {
            double conv = 0.0;
            std::vector<double> rho_uRi(np);
            for (int i = 0; i < g.dim; ++i) {
                kernels::mul(state.rho.phys().data(), uR.comp[i].phys().data(), rho_uRi.data(), np);
                for (int j = 0; j < g.dim; ++j)
                    conv += kernels::triple_dot(rho_uRi.data(), u_used.comp[j].phys().data(),
                                                bdata[b].dphi[i][j].data(), np);
            }
            conv *= cellvol;
            const double press =
                chi_press * kernels::dot(pfield.phys().data(), bdata[b].divphi.data(), np) * cellvol;
            double sob = cfg.eps_visc > 0.0 ? cfg.eps_visc * sobolev_inner_3(u_used, bdata[b].phi) : 0.0;
            flux_acc[b] += dt * (conv + press - sob);
            for (std::size_t k = 0; k < rates.phi_eps.size(); ++k) {
                double pk_phi = 0.0;
                for (int c = 0; c < g.dim; ++c)
                    pk_phi += kernels::triple_dot(state.rho.phys().data(),
                                                  rates.phi_eps[k].comp[c].phys().data(),
                                                  bdata[b].phi.comp[c].phys().data(), np);
                pk_phi *= cellvol;
                stoch_acc[b] += pk_phi * (k < dW.size() ? dW[k] : 0.0);
                qv_acc[b] += dt * pk_phi * pk_phi;
                psi_acc[b][k] += dt * pk_phi;
            }
        }
        for (std::size_t k = 0; k < rates.phi_eps.size(); ++k) {
            double m_phi = 0.0;
            for (int c = 0; c < g.dim; ++c)
                m_phi += l2_inner(state.mom.comp[c], rates.phi_eps[k].comp[c]);
            energy_qv_acc += dt * m_phi * m_phi;
            if (k < dW.size()) beta_acc[k] += dW[k];
        }
        double stoch_inc = 0.0;
        for (std::size_t k = 0; k < rates.psi.size() && k < dW.size(); ++k)
            stoch_inc += rates.psi[k] * dW[k];

        if (opt.transport_only) {
            state.rho = std::move(rho1);
            state.S = std::move(S1);
            state.mom = galerkin_momentum(state.rho, u_init, band);
        } else {
            MomentumResult mr = momentum_step_impl(state, u_used, rho1, rates.phi_eps, cfg, dt, dW);
            state.rho = std::move(rho1);
            state.S = std::move(S1);
            state.mom = std::move(mr.q_next);
            u = std::move(mr.u_next);
        }
        state.time += dt;
        rates = left_rates(state.rho, opt.transport_only ? u_init : u, noise, cfg, band);
        emit_ledger(state.time, stoch_inc, false);
    };

    // Attempt an interval, recursively halving on rejection with the Wiener
    // increment split by a deterministic Brownian bridge.
    auto attempt = [&](auto&& self, double dt, std::vector<double> dW, long macro, int depth,
                       long pos) -> void {
        try {
            leaf_step(dt, dW);
        } catch (const StepRejection&) {
            if (depth >= max_depth) throw;
            std::vector<double> left(dW.size()), right(dW.size());
            rng::GaussianStream bridge(rng::derive_seed(
                opt.seed, {0xB21D6Eull, static_cast<std::uint64_t>(macro),
                           static_cast<std::uint64_t>(depth), static_cast<std::uint64_t>(pos)}));
            const double sd = 0.5 * std::sqrt(dt);
            for (std::size_t k = 0; k < dW.size(); ++k) {
                const double xi = sd * bridge.next();
                left[k] = 0.5 * dW[k] + xi;
                right[k] = 0.5 * dW[k] - xi;
            }
            self(self, 0.5 * dt, std::move(left), macro, depth + 1, 2 * pos);
            self(self, 0.5 * dt, std::move(right), macro, depth + 1, 2 * pos + 1);
        }
    };

    for (long n = 0; n < steps; ++n) {
        std::vector<double> dW =
            noise.K() > 0 ? tr.path.increments[static_cast<std::size_t>(n)] : std::vector<double>{};
        try {
            attempt(attempt, cfg.h, std::move(dW), n, 0, 0);
        } catch (const StepRejection& rej) {
            tr.failed = true;
            tr.failure = "step " + std::to_string(n) + " rejected down to h_min: " + rej.what();
            break;
        } catch (const NumericalError& err) {
            tr.failed = true;
            tr.failure = "step " + std::to_string(n) + ": " + err.what();
            break;
        }
        if ((n + 1) % snap_every == 0) emit_snapshot();
    }
    if (!tr.failed && steps > 0 && (steps % snap_every) != 0) emit_snapshot();
    return tr;
}

} // namespace eulermv

#include "eulermv/diag.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eulermv/kernels.hpp"

namespace eulermv {

double total_energy(const FluidState& state, const DefectEstimate* defects, const ThermoParams& par) {
    const GridSpec& g = state.rho.grid();
    if (state.rho.min_value() <= 0.0) throw DomainError("total_energy: density must be positive");
    std::vector<const double*> mp(g.dim);
    for (int a = 0; a < g.dim; ++a) mp[a] = state.mom.comp[a].phys().data();
    double e = 0.5 * kernels::kinetic_sum(mp.data(), g.dim, state.rho.phys().data(), g.points()) *
               g.cell_volume();
    e += par.c_v * pressure_field(state.rho, state.S, par).integral();
    if (defects) e += 0.5 * defects->rconv_trace_integral() + par.c_v * defects->rpress_integral();
    return e;
}

double energy_balance_residual(const LedgerRow& a, const LedgerRow& b) {
    const double dt = b.t - a.t;
    return (b.e_kin + b.e_int) - (a.e_kin + a.e_int) + dt * a.eps_uu - dt * a.ito - b.stoch_inc;
}

SpectralField temperature_field(const SpectralField& rho, const SpectralField& S,
                                const ThermoParams& par) {
    require_same_grid(rho.grid(), S.grid(), "temperature_field");
    std::vector<double> th(rho.grid().points());
    for (std::size_t i = 0; i < th.size(); ++i)
        th[i] = thermo::temperature_from_conservative(rho.phys()[i], S.phys()[i], par);
    return SpectralField::from_physical(rho.grid(), std::move(th));
}

ReferenceTriple reference_from_state(const FluidState& state, const ThermoParams& par) {
    ReferenceTriple ref;
    ref.r = state.rho;
    ref.Theta = temperature_field(state.rho, state.S, par);
    for (int a = 0; a < state.rho.grid().dim; ++a)
        ref.U.comp.push_back(SpectralField::divide(state.mom.comp[a], state.rho));
    return ref;
}

RelEntropyReport relative_energy(const FluidState& state, const ReferenceTriple& ref,
                                 const DefectEstimate* defects, const ThermoParams& par) {
    const GridSpec& g = state.rho.grid();
    require_same_grid(g, ref.r.grid(), "relative_energy");
    const int d = g.dim;
    const std::size_t np = g.points();

    double rho_lo = ref.r.min_value(), rho_hi = ref.r.max_value();
    double E_lo = 0.0, E_hi = 0.0;
    {
        // reference internal-energy range for the default essential window
        bool first = true;
        for (std::size_t i = 0; i < np; ++i) {
            const double E = par.c_v * ref.r.phys()[i] * ref.Theta.phys()[i];
            E_lo = first ? E : std::min(E_lo, E);
            E_hi = first ? E : std::max(E_hi, E);
            first = false;
        }
    }
    PhaseCutoff bump = make_phase_bump(rho_lo, rho_hi, E_lo, E_hi);

    RelEntropyReport rep;
    rep.t = state.time;
    double total = 0.0, ess = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        const double rho = state.rho.phys()[i];
        const double S = state.S.phys()[i];
        if (!(rho > 0.0)) throw DomainError("relative_energy: non-positive density sample");
        const double r = ref.r.phys()[i];
        const double Th = ref.Theta.phys()[i];
        if (!(r > 0.0) || !(Th > 0.0))
            throw DomainError("relative_energy: reference not bounded away from zero");

        const double theta = thermo::temperature_from_conservative(rho, S, par);
        const double E = par.c_v * rho * theta;
        const double s = S / rho; // = c_v log theta - log rho by construction

        double kin = 0.0;
        for (int a = 0; a < d; ++a) {
            const double du = state.mom.comp[a].phys()[i] / rho - ref.U.comp[a].phys()[i];
            kin += du * du;
        }
        const double sr = par.c_v * std::log(Th) - std::log(r);
        const double H_ref = r * par.c_v * Th - Th * r * sr;
        const double dH = thermo::ballistic_drho(r, Th, par);
        const double val = 0.5 * rho * kin + E - Th * rho * s - dH * (rho - r) - H_ref;
        total += val;
        ess += bump(rho, E) * val;
    }
    total *= g.cell_volume();
    ess *= g.cell_volume();
    rep.value = total;
    rep.ess_part = ess;
    rep.res_part = total - ess;
    if (defects) {
        rep.defect_contrib =
            0.5 * defects->rconv_trace_integral() + par.c_v * defects->rpress_integral();
        rep.value += rep.defect_contrib;
    }

    // instantaneous comparison terms
    {
        std::vector<std::vector<SpectralField>> gradU(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) gradU[i].push_back(ref.U.comp[i].derivative(j));
        // p(r, Theta) = r * Theta pointwise
        std::vector<double> pv(np);
        for (std::size_t i = 0; i < np; ++i) pv[i] = ref.r.phys()[i] * ref.Theta.phys()[i];
        SpectralVectorField gp_ref = grad(SpectralField::from_physical(g, std::move(pv)));
        double q = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            const double rho = state.rho.phys()[i];
            const double theta = thermo::temperature_from_conservative(rho, state.S.phys()[i], par);
            const double p_state = rho * theta;
            double quad = 0.0, work = 0.0, divU = 0.0;
            for (int a = 0; a < d; ++a) {
                const double dua = state.mom.comp[a].phys()[i] / rho - ref.U.comp[a].phys()[i];
                for (int b = 0; b < d; ++b) {
                    const double dub = state.mom.comp[b].phys()[i] / rho - ref.U.comp[b].phys()[i];
                    quad -= rho * dua * gradU[a][b].phys()[i] * dub;
                }
                work -= (rho * ref.U.comp[a].phys()[i] - state.mom.comp[a].phys()[i]) *
                        gp_ref.comp[a].phys()[i] / ref.r.phys()[i];
                divU += gradU[a][a].phys()[i];
            }
            q += quad + work - p_state * divU;
        }
        q *= g.cell_volume();
        if (defects && defects->coarse == g) {
            const DefectEstimate& de = *defects;
            for (std::size_t cidx = 0; cidx < de.r_press.size(); ++cidx) {
                double pair = 0.0, divU = 0.0;
                for (int a = 0; a < d; ++a) {
                    for (int b = 0; b < d; ++b)
                        pair += gradU[a][b].phys()[cidx] * de.r_conv[cidx][a * d + b];
                    divU += gradU[a][a].phys()[cidx];
                }
                q -= (pair + divU * de.r_press[cidx]) * de.coarse.cell_volume();
            }
        }
        rep.q_value = q;
    }
    return rep;
}

std::pair<double, double> ess_res_split(const FluidState& state, const PhaseCutoff& Phi,
                                        const PhaseFunctional& G, const ThermoParams& par) {
    const GridSpec& g = state.rho.grid();
    const int d = g.dim;
    double ess = 0.0, res = 0.0;
    double m[3] = {0, 0, 0};
    for (std::size_t i = 0; i < g.points(); ++i) {
        const double rho = state.rho.phys()[i];
        const double E =
            par.c_v * rho * thermo::temperature_from_conservative(rho, state.S.phys()[i], par);
        for (int a = 0; a < d; ++a) m[a] = state.mom.comp[a].phys()[i];
        const double val = G(rho, E, m, d);
        const double w = Phi(rho, E);
        ess += w * val;
        res += (1.0 - w) * val;
    }
    return {ess * g.cell_volume(), res * g.cell_volume()};
}

PhaseCutoff make_phase_bump(double rho_lo, double rho_hi, double E_lo, double E_hi) {
    // 1 on [lo, hi], smooth fall-off to 0 on [lo/2, lo] and [hi, 2 hi]
    auto edge = [](double x, double lo, double hi) {
        if (x >= lo && x <= hi) return 1.0;
        if (x < lo) {
            if (lo <= 0.0) return 0.0;
            return chi((lo - x) / (0.5 * lo));
        }
        return chi((x - hi) / hi);
    };
    return [=](double rho, double E) {
        return edge(rho, rho_lo, rho_hi) * edge(E, E_lo, E_hi);
    };
}

WeakStrongReport weak_strong_monitor(const CoarseTrajectory& coarse, const Trajectory& strong,
                                     const SolverConfig& cfg, double kappa, double tol,
                                     double abs_floor) {
    if (coarse.times.size() != strong.snaps.size())
        throw ConfigError("weak_strong_monitor: snapshot counts differ (grid/seed mismatch)");
    for (std::size_t i = 0; i < coarse.times.size(); ++i)
        if (std::abs(coarse.times[i] - strong.snaps[i].time) > 1e-9)
            throw ConfigError("weak_strong_monitor: snapshot times differ (grid/seed mismatch)");

    const GridSpec& cgrid = coarse.states[0].rho.grid();
    const GridSpec& fgrid = strong.snaps[0].rho.grid();
    if (fgrid.n % cgrid.n != 0)
        throw ConfigError("weak_strong_monitor: incompatible grids");
    const int factor = fgrid.n / cgrid.n;

    WeakStrongReport rep;
    // Lipschitz scale of the strong velocity
    double sup_grad = 0.0;
    for (const auto& snap : strong.snaps) {
        SpectralVectorField u = recover_velocity(snap, cfg);
        for (int i = 0; i < fgrid.dim; ++i)
            for (int j = 0; j < fgrid.dim; ++j) {
                SpectralField dij = u.comp[i].derivative(j);
                sup_grad = std::max(sup_grad,
                                    std::max(std::abs(dij.min_value()), std::abs(dij.max_value())));
            }
    }
    rep.sup_grad_u = sup_grad;
    rep.c_hat = kappa * (1.0 + sup_grad);

    double e0 = 0.0;
    for (std::size_t i = 0; i < coarse.times.size(); ++i) {
        FluidState ref_state =
            factor == 1 ? strong.snaps[i] : coarse_grain(strong.snaps[i], factor, cfg.thermo).coarse;
        ReferenceTriple ref = reference_from_state(ref_state, cfg.thermo);
        const DefectEstimate* de = coarse.defects.empty() ? nullptr : &coarse.defects[i];
        RelEntropyReport rel = relative_energy(coarse.states[i], ref, de, cfg.thermo);
        WeakStrongPoint pt;
        pt.t = coarse.times[i];
        pt.e_rel = rel.value;
        if (i == 0) e0 = rel.value;
        pt.bound = e0 * std::exp(rep.c_hat * pt.t);
        pt.violated = pt.e_rel > pt.bound * (1.0 + tol) + abs_floor;
        if (pt.violated) rep.ok = false;
        rep.series.push_back(pt);
    }
    return rep;
}

MomentReport apriori_moment_check(const std::vector<Trajectory>& ensemble, int p) {
    if (ensemble.empty()) throw ConfigError("apriori_moment_check: ensemble is empty");
    MomentReport rep;
    rep.p = p;
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& tr : ensemble) {
        if (tr.failed) continue;
        double sup_e = 0.0, diss = 0.0;
        for (std::size_t i = 0; i < tr.ledger.rows.size(); ++i) {
            const LedgerRow& row = tr.ledger.rows[i];
            sup_e = std::max(sup_e, row.e_kin + row.e_int);
            if (i > 0) diss += (row.t - tr.ledger.rows[i - 1].t) * tr.ledger.rows[i - 1].eps_uu;
        }
        acc += std::pow(sup_e + diss, p);
        ++n;
    }
    if (n == 0) throw NumericalError("apriori_moment_check: all paths failed");
    rep.value = acc / static_cast<double>(n);
    rep.finite = std::isfinite(rep.value);
    return rep;
}

} // namespace eulermv

#include "eulermv/defect.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eulermv/kernels.hpp"

namespace eulermv {

namespace {

// Jacobi eigenvalue sweep, enough for the 2x2 / 3x3 symmetric cell matrices.
double jacobi_min_eig(double a[3][3], int n) {
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int r = 0; r < n; ++r) {
                    const double arp = a[r][p], arq = a[r][q];
                    a[r][p] = c * arp - s * arq;
                    a[r][q] = s * arp + c * arq;
                }
                for (int r = 0; r < n; ++r) {
                    const double apr = a[p][r], aqr = a[q][r];
                    a[p][r] = c * apr - s * aqr;
                    a[q][r] = s * apr + c * aqr;
                }
            }
    }
    double m = a[0][0];
    for (int i = 1; i < n; ++i) m = std::min(m, a[i][i]);
    return m;
}

// decompose a row-major flat index into per-axis indices
void decompose(std::size_t idx, int dim, int n, int out[3]) {
    out[0] = out[1] = out[2] = 0;
    for (int a = dim - 1; a >= 0; --a) {
        out[a] = static_cast<int>(idx % n);
        idx /= n;
    }
}

std::size_t compose(const int idx[3], int dim, int n) {
    std::size_t r = 0;
    for (int a = 0; a < dim; ++a) r = r * n + idx[a];
    return r;
}

// indices of path.times matching the trajectory times, for aggregating
// Wiener increments between snapshots
std::vector<std::size_t> align_times(const std::vector<double>& coarse_times,
                                     const std::vector<double>& path_times) {
    std::vector<std::size_t> idx;
    idx.reserve(coarse_times.size());
    for (double t : coarse_times) {
        bool found = false;
        for (std::size_t i = 0; i < path_times.size(); ++i) {
            if (std::abs(path_times[i] - t) < 1e-9 * std::max(1.0, std::abs(t))) {
                idx.push_back(i);
                found = true;
                break;
            }
        }
        if (!found) throw ConfigError("defect: trajectory times do not align with the Wiener grid");
    }
    return idx;
}

} // namespace

double DefectEstimate::rconv_trace_integral() const {
    const int d = coarse.dim;
    double s = 0.0;
    for (const auto& m : r_conv)
        for (int i = 0; i < d; ++i) s += m[i * d + i];
    return s * coarse.cell_volume();
}

double DefectEstimate::rpress_integral() const {
    double s = 0.0;
    for (double v : r_press) s += v;
    return s * coarse.cell_volume();
}

double DefectEstimate::min_rconv_eigenvalue() const {
    double m = 0.0;
    bool first = true;
    for (const auto& cell : r_conv) {
        const double e = min_symmetric_eigenvalue(cell, coarse.dim);
        m = first ? e : std::min(m, e);
        first = false;
    }
    return first ? 0.0 : m;
}

double DefectEstimate::min_rpress() const {
    double m = 0.0;
    bool first = true;
    for (double v : r_press) {
        m = first ? v : std::min(m, v);
        first = false;
    }
    return first ? 0.0 : m;
}

double min_symmetric_eigenvalue(const std::array<double, 9>& a, int dim) {
    if (dim == 1) return a[0];
    double m[3][3] = {{0}};
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m[i][j] = a[i * dim + j];
    return jacobi_min_eig(m, dim);
}

CoarseGrained coarse_grain(const FluidState& fine, int factor, const ThermoParams& par) {
    const GridSpec& g = fine.rho.grid();
    if (factor < 1 || g.n % factor != 0)
        throw ConfigError("coarse_grain: factor must divide the fine grid");
    const int nc = g.n / factor;
    if (nc % 2 != 0) throw ConfigError("coarse_grain: coarse grid must stay even (factor too large)");
    const int mc = std::min(g.modes, nc / 3);
    if (mc < 1) throw ConfigError("coarse_grain: coarse grid cannot carry a Galerkin band");

    GridSpec cg(g.dim, nc, mc, g.length[0]);
    cg.length = g.length;

    const int d = g.dim;
    const std::size_t ncells = cg.points();
    const std::size_t npf = g.points();
    const double wcell = 1.0 / std::pow(static_cast<double>(factor), d);

    std::vector<double> rho_c(ncells, 0.0), S_c(ncells, 0.0), press_c(ncells, 0.0);
    std::vector<std::array<double, 3>> m_c(ncells, {0.0, 0.0, 0.0});
    std::vector<std::array<double, 9>> mm_c(ncells, std::array<double, 9>{});

    DefectEstimate de;
    de.coarse = cg;
    de.factor = factor;
    de.young.assign(ncells, {});

    SpectralField pfine = pressure_field(fine.rho, fine.S, par);

    int fi[3];
    for (std::size_t i = 0; i < npf; ++i) {
        decompose(i, d, g.n, fi);
        int ci[3] = {fi[0] / factor, fi[1] / factor, fi[2] / factor};
        const std::size_t c = compose(ci, d, nc);
        const double r = fine.rho.phys()[i];
        const double s = fine.S.phys()[i];
        rho_c[c] += wcell * r;
        S_c[c] += wcell * s;
        press_c[c] += wcell * pfine.phys()[i];
        DefectEstimate::Atom atom{r, {0.0, 0.0, 0.0}, s, wcell};
        for (int a = 0; a < d; ++a) {
            const double ma = fine.mom.comp[a].phys()[i];
            m_c[c][a] += wcell * ma;
            atom.m[a] = ma;
            for (int b = 0; b < d; ++b) mm_c[c][a * d + b] += wcell * ma * fine.mom.comp[b].phys()[i] / r;
        }
        de.young[c].push_back(atom);
    }

    de.r_conv.assign(ncells, {});
    de.r_press.assign(ncells, 0.0);
    for (std::size_t c = 0; c < ncells; ++c) {
        if (!(rho_c[c] > 0.0)) throw DomainError("coarse_grain: averaged density not positive");
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                de.r_conv[c][a * d + b] = mm_c[c][a * d + b] - m_c[c][a] * m_c[c][b] / rho_c[c];
        de.r_press[c] = press_c[c] - thermo::pressure_conservative(rho_c[c], S_c[c], par);
    }

    CoarseGrained out;
    out.defects = std::move(de);
    out.coarse.rho = SpectralField::from_physical(cg, std::move(rho_c));
    out.coarse.S = SpectralField::from_physical(cg, std::move(S_c));
    for (int a = 0; a < d; ++a) {
        std::vector<double> comp(ncells);
        for (std::size_t c = 0; c < ncells; ++c) comp[c] = m_c[c][a];
        out.coarse.mom.comp.push_back(SpectralField::from_physical(cg, std::move(comp)));
    }
    out.coarse.time = fine.time;
    return out;
}

CoarseTrajectory coarse_grain_trajectory(const Trajectory& fine, int factor, const ThermoParams& par) {
    CoarseTrajectory ct;
    for (const auto& snap : fine.snaps) {
        CoarseGrained cgd = coarse_grain(snap, factor, par);
        ct.times.push_back(snap.time);
        ct.states.push_back(std::move(cgd.coarse));
        ct.defects.push_back(std::move(cgd.defects));
    }
    // trapezoid accumulation of the time-integrated variables
    const std::size_t ncells = ct.defects.empty() ? 0 : ct.defects[0].r_press.size();
    SpectralField Sacc = SpectralField::zeros(ct.states[0].S.grid());
    std::vector<double> pacc(ncells, 0.0);
    std::vector<std::array<double, 9>> cacc(ncells, std::array<double, 9>{});
    ct.S_int.push_back(Sacc);
    ct.rpress_int.push_back(pacc);
    ct.rconv_int.push_back(cacc);
    for (std::size_t i = 1; i < ct.states.size(); ++i) {
        const double dt = ct.times[i] - ct.times[i - 1];
        SpectralField mid = ct.states[i - 1].S + ct.states[i].S;
        Sacc.axpy_inplace(0.5 * dt, mid);
        for (std::size_t c = 0; c < ncells; ++c) {
            pacc[c] += 0.5 * dt * (ct.defects[i - 1].r_press[c] + ct.defects[i].r_press[c]);
            for (int e = 0; e < 9; ++e)
                cacc[c][e] += 0.5 * dt * (ct.defects[i - 1].r_conv[c][e] + ct.defects[i].r_conv[c][e]);
        }
        ct.S_int.push_back(Sacc);
        ct.rpress_int.push_back(pacc);
        ct.rconv_int.push_back(cacc);
    }
    return ct;
}

std::vector<double> continuity_residual(const CoarseTrajectory& ct, const SpectralField& psi) {
    require_same_grid(ct.states[0].rho.grid(), psi.grid(), "continuity_residual");
    SpectralVectorField gpsi = grad(psi);
    std::vector<double> out(ct.times.size(), 0.0);
    const double rp0 = l2_inner(ct.states[0].rho, psi);
    double flux_acc = 0.0;
    for (std::size_t i = 1; i < ct.times.size(); ++i) {
        const double dt = ct.times[i] - ct.times[i - 1];
        double f_prev = 0.0, f_cur = 0.0;
        for (int a = 0; a < psi.grid().dim; ++a) {
            f_prev += l2_inner(ct.states[i - 1].mom.comp[a], gpsi.comp[a]);
            f_cur += l2_inner(ct.states[i].mom.comp[a], gpsi.comp[a]);
        }
        flux_acc += 0.5 * dt * (f_prev + f_cur);
        out[i] = (l2_inner(ct.states[i].rho, psi) - rp0) - flux_acc;
    }
    return out;
}

std::vector<double> momentum_residual(const CoarseTrajectory& ct, const NoiseModel& noise,
                                      const WienerPath& path, const SpectralVectorField& phi,
                                      const ThermoParams& par, bool include_defects) {
    const GridSpec& cg = ct.states[0].rho.grid();
    require_same_grid(cg, phi.grid(), "momentum_residual");
    if (include_defects && ct.defects.empty())
        throw ConfigError("momentum_residual: defect terms requested but the trajectory carries none; "
                          "the identity is not expected to close without them");
    const int d = cg.dim;
    const std::size_t np = cg.points();
    const double cellvol = cg.cell_volume();

    std::vector<std::vector<std::vector<double>>> dphi(d, std::vector<std::vector<double>>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) dphi[i][j] = phi.comp[i].derivative(j).phys();
    std::vector<double> divphi(np, 0.0);
    for (int i = 0; i < d; ++i)
        for (std::size_t x = 0; x < np; ++x) divphi[x] += dphi[i][i][x];

    auto flux_at = [&](std::size_t s) {
        const FluidState& st = ct.states[s];
        double conv = 0.0;
        std::vector<double> mi_over_rho(np);
        for (int i = 0; i < d; ++i) {
            kernels::div(st.mom.comp[i].phys().data(), st.rho.phys().data(), mi_over_rho.data(), np);
            for (int j = 0; j < d; ++j)
                conv += kernels::triple_dot(mi_over_rho.data(), st.mom.comp[j].phys().data(),
                                            dphi[i][j].data(), np);
        }
        double press = kernels::dot(pressure_field(st.rho, st.S, par).phys().data(), divphi.data(), np);
        double defect = 0.0;
        if (include_defects) {
            const DefectEstimate& de = ct.defects[s];
            for (std::size_t c = 0; c < de.r_press.size(); ++c) {
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) defect += de.r_conv[c][i * d + j] * dphi[i][j][c];
                defect += de.r_press[c] * divphi[c];
            }
        }
        return (conv + press + defect) * cellvol;
    };

    auto m_phi = [&](std::size_t s) {
        double v = 0.0;
        for (int a = 0; a < d; ++a) v += l2_inner(ct.states[s].mom.comp[a], phi.comp[a]);
        return v;
    };

    std::vector<std::size_t> tidx = align_times(ct.times, path.times);

    std::vector<double> out(ct.times.size(), 0.0);
    const double m0 = m_phi(0);
    double flux_acc = 0.0, stoch_acc = 0.0;
    for (std::size_t i = 1; i < ct.times.size(); ++i) {
        const double dt = ct.times[i] - ct.times[i - 1];
        flux_acc += 0.5 * dt * (flux_at(i - 1) + flux_at(i));
        // noise increments over (t_{i-1}, t_i], coefficient at the left snapshot
        for (int k = 0; k < noise.K(); ++k) {
            double coeff = 0.0;
            for (int a = 0; a < d; ++a)
                coeff += kernels::triple_dot(ct.states[i - 1].rho.phys().data(),
                                             noise.phi()[k].comp[a].phys().data(),
                                             phi.comp[a].phys().data(), np);
            coeff *= cellvol;
            double dw = 0.0;
            for (std::size_t s = tidx[i - 1]; s < tidx[i]; ++s) dw += path.increments[s][k];
            stoch_acc += coeff * dw;
        }
        out[i] = (m_phi(i) - m0) - flux_acc - stoch_acc;
    }
    return out;
}

namespace {
double clamp_z(double s, double c) { return std::max(-c, std::min(s, c)); }
} // namespace

std::vector<double> entropy_inequality_residual(const CoarseTrajectory& ct, double clamp_level,
                                                const SpectralField& phi) {
    const GridSpec& cg = ct.states[0].rho.grid();
    require_same_grid(cg, phi.grid(), "entropy_inequality_residual");
    if (phi.min_value() < -1e-12)
        throw ConfigError("entropy_inequality_residual: test function must be nonnegative");
    const int d = cg.dim;
    const std::size_t np = cg.points();
    const double cellvol = cg.cell_volume();
    SpectralVectorField gphi = grad(phi);

    // <V; Z(S')> and <V; Z(S') m'/rho'> per cell
    auto paired = [&](std::size_t s, std::vector<double>& z, std::vector<std::array<double, 3>>& zm) {
        const DefectEstimate& de = ct.defects[s];
        z.assign(np, 0.0);
        zm.assign(np, {0.0, 0.0, 0.0});
        for (std::size_t c = 0; c < np; ++c) {
            for (const auto& atom : de.young[c]) {
                const double zv = clamp_z(atom.S, clamp_level);
                z[c] += atom.w * zv;
                for (int a = 0; a < d; ++a) zm[c][a] += atom.w * zv * atom.m[a] / atom.rho;
            }
        }
    };

    std::vector<double> out(ct.times.size(), 0.0);
    std::vector<double> z_prev, z_cur;
    std::vector<std::array<double, 3>> zm_prev, zm_cur;
    paired(0, z_prev, zm_prev);
    double rhs0 = kernels::dot(z_prev.data(), phi.phys().data(), np) * cellvol;
    double lhs_acc = 0.0;
    for (std::size_t i = 1; i < ct.times.size(); ++i) {
        paired(i, z_cur, zm_cur);
        const double dt = ct.times[i] - ct.times[i - 1];
        double f_prev = 0.0, f_cur = 0.0;
        for (std::size_t c = 0; c < np; ++c)
            for (int a = 0; a < d; ++a) {
                f_prev += zm_prev[c][a] * gphi.comp[a].phys()[c];
                f_cur += zm_cur[c][a] * gphi.comp[a].phys()[c];
            }
        lhs_acc += 0.5 * dt * (f_prev + f_cur) * cellvol;
        const double rhs = kernels::dot(z_cur.data(), phi.phys().data(), np) * cellvol - rhs0;
        out[i] = lhs_acc - rhs;
        z_prev.swap(z_cur);
        zm_prev.swap(zm_cur);
    }
    return out;
}

std::vector<double> energy_identity_residual(const CoarseTrajectory& ct, const NoiseModel& noise,
                                             const WienerPath& path, const ThermoParams& par,
                                             bool include_defects) {
    const GridSpec& cg = ct.states[0].rho.grid();
    const int d = cg.dim;
    const std::size_t np = cg.points();
    const double cellvol = cg.cell_volume();

    auto total_e = [&](std::size_t s) {
        const FluidState& st = ct.states[s];
        std::vector<const double*> mp(d);
        for (int a = 0; a < d; ++a) mp[a] = st.mom.comp[a].phys().data();
        double e = 0.5 * kernels::kinetic_sum(mp.data(), d, st.rho.phys().data(), np) * cellvol;
        e += par.c_v * pressure_field(st.rho, st.S, par).integral();
        if (include_defects && !ct.defects.empty())
            e += 0.5 * ct.defects[s].rconv_trace_integral() + par.c_v * ct.defects[s].rpress_integral();
        return e;
    };

    std::vector<std::size_t> tidx = align_times(ct.times, path.times);
    std::vector<double> out(ct.times.size(), 0.0);
    for (std::size_t i = 1; i < ct.times.size(); ++i) {
        const double dt = ct.times[i] - ct.times[i - 1];
        const FluidState& left = ct.states[i - 1];
        double ito = 0.0, stoch = 0.0;
        for (int k = 0; k < noise.K(); ++k) {
            double n2 = 0.0, mdot = 0.0;
            for (int a = 0; a < d; ++a) {
                n2 += kernels::triple_dot(left.rho.phys().data(), noise.phi()[k].comp[a].phys().data(),
                                          noise.phi()[k].comp[a].phys().data(), np);
                mdot += kernels::dot(left.mom.comp[a].phys().data(),
                                     noise.phi()[k].comp[a].phys().data(), np);
            }
            ito += 0.5 * n2 * cellvol;
            double dw = 0.0;
            for (std::size_t s = tidx[i - 1]; s < tidx[i]; ++s) dw += path.increments[s][k];
            stoch += mdot * cellvol * dw;
        }
        out[i] = total_e(i) - total_e(i - 1) - dt * ito - stoch;
    }
    return out;
}

std::vector<double> young_pairing(const DefectEstimate& de,
                                  double (*g)(double rho, const double* m, double S, int dim)) {
    std::vector<double> out(de.young.size(), 0.0);
    for (std::size_t c = 0; c < de.young.size(); ++c)
        for (const auto& atom : de.young[c])
            out[c] += atom.w * g(atom.rho, atom.m.data(), atom.S, de.coarse.dim);
    return out;
}

} // namespace eulermv

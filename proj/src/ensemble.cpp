#include "eulermv/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "eulermv/rng.hpp"

namespace eulermv {

Ensemble run_ensemble(const EnsembleSpec& spec) {
    if (spec.n_paths <= 0) throw ConfigError("run_ensemble: n_paths must be positive");
    Ensemble ens;
    ens.paths.resize(spec.n_paths);
    ens.seeds.resize(spec.n_paths);
    for (int i = 0; i < spec.n_paths; ++i)
        ens.seeds[i] = rng::derive_seed(spec.base_seed, {0x504154u, static_cast<std::uint64_t>(i)});

    auto run_one = [&](int i) {
        TrajectoryOptions opt = spec.traj;
        opt.seed = ens.seeds[i];
        ens.paths[i] = run_trajectory(spec.initial, spec.cfg, spec.noise, opt);
    };

    const int workers = std::max(1, spec.threads);
    if (workers == 1) {
        for (int i = 0; i < spec.n_paths; ++i) run_one(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < spec.n_paths; i = next.fetch_add(1)) run_one(i);
            });
        for (auto& t : pool) t.join();
    }

    for (const auto& p : ens.paths)
        if (p.failed) ++ens.n_failed;
    if (ens.n_failed == spec.n_paths) throw NumericalError("run_ensemble: all paths failed");
    return ens;
}

namespace {

std::vector<const Trajectory*> usable_paths(const Ensemble& ens) {
    std::vector<const Trajectory*> out;
    for (const auto& p : ens.paths)
        if (!p.failed) out.push_back(&p);
    if (static_cast<int>(out.size()) < kMinPathsForStats)
        throw ConfigError("martingale statistics refused: need at least " +
                          std::to_string(kMinPathsForStats) + " usable paths, have " +
                          std::to_string(out.size()));
    return out;
}

double m_value(const WeakBudget& wb, std::size_t t) {
    return (wb.mom_phi[t] - wb.mom_phi[0]) - wb.flux_int[t];
}

} // namespace

MartingaleReport martingale_stat(const Ensemble& ens, std::size_t budget_index) {
    std::vector<const Trajectory*> paths = usable_paths(ens);
    const Trajectory& first = *paths[0];
    if (budget_index >= first.budgets.size())
        throw ConfigError("martingale_stat: no budget with that index on the trajectories");
    const std::size_t ntimes = first.budgets[budget_index].mom_phi.size();
    const int K = static_cast<int>(first.beta.size());

    MartingaleReport rep;
    rep.z_threshold = stats::bonferroni_z(static_cast<int>(ntimes > 1 ? ntimes - 1 : 1));

    for (std::size_t t = 1; t < ntimes; ++t) {
        MartingaleRow row;
        row.t = first.snaps[t].time;
        std::vector<double> ms(paths.size()), iso(paths.size());
        std::vector<std::vector<double>> cross(K, std::vector<double>(paths.size()));
        for (std::size_t p = 0; p < paths.size(); ++p) {
            const WeakBudget& wb = paths[p]->budgets[budget_index];
            const double m = m_value(wb, t);
            ms[p] = m;
            iso[p] = m * m - wb.qv_int[t];
            for (int k = 0; k < K; ++k)
                cross[k][p] = m * paths[p]->beta[k][t] - wb.psi_int[k][t];
        }
        row.m = stats::summarize(ms);
        row.isometry = stats::summarize(iso);
        row.pass_mean = std::abs(row.m.mean) <= rep.z_threshold * std::max(row.m.se, 1e-300);
        row.pass_isometry =
            std::abs(row.isometry.mean) <= rep.z_threshold * std::max(row.isometry.se, 1e-300);
        for (int k = 0; k < K; ++k) {
            stats::Summary cs = stats::summarize(cross[k]);
            if (std::abs(cs.mean) > rep.z_threshold * std::max(cs.se, 1e-300)) row.pass_cross = false;
            row.cross.push_back(cs);
        }
        if (!(row.pass_mean && row.pass_isometry && row.pass_cross)) rep.pass = false;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

MartingaleReport energy_martingale_stat(const Ensemble& ens) {
    std::vector<const Trajectory*> paths = usable_paths(ens);
    const Trajectory& first = *paths[0];
    const std::size_t ntimes = first.snaps.size();
    const int K = static_cast<int>(first.beta.size());

    // map snapshot times onto ledger rows to accumulate the Ito correction
    auto energy_process = [](const Trajectory& tr, std::vector<double>& out) {
        // cumulative E_t - E_0 - int ito dt - int stoch dW at every ledger row,
        // then sampled at snapshot times
        const auto& rows = tr.ledger.rows;
        std::vector<double> proc(rows.size(), 0.0);
        double ito_acc = 0.0, stoch_acc = 0.0;
        const double e0 = rows[0].e_kin + rows[0].e_int;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            ito_acc += (rows[i].t - rows[i - 1].t) * rows[i - 1].ito;
            stoch_acc += rows[i].stoch_inc;
            proc[i] = (rows[i].e_kin + rows[i].e_int) - e0 - ito_acc;
        }
        (void)stoch_acc;
        out.clear();
        for (const auto& snap : tr.snaps) {
            // ledger rows may be finer than snapshots (step halving)
            std::size_t j = 0;
            while (j + 1 < rows.size() && rows[j].t < snap.time - 1e-12) ++j;
            out.push_back(proc[j]);
        }
    };

    MartingaleReport rep;
    rep.z_threshold = stats::bonferroni_z(static_cast<int>(ntimes > 1 ? ntimes - 1 : 1));
    std::vector<std::vector<double>> procs(paths.size());
    for (std::size_t p = 0; p < paths.size(); ++p) energy_process(*paths[p], procs[p]);

    for (std::size_t t = 1; t < ntimes; ++t) {
        MartingaleRow row;
        row.t = first.snaps[t].time;
        std::vector<double> ms(paths.size()), iso(paths.size());
        std::vector<std::vector<double>> cross(K, std::vector<double>(paths.size()));
        for (std::size_t p = 0; p < paths.size(); ++p) {
            const double m = procs[p][t];
            ms[p] = m;
            iso[p] = m * m - paths[p]->energy_qv[t];
            for (int k = 0; k < K; ++k) cross[k][p] = m * paths[p]->beta[k][t];
        }
        row.m = stats::summarize(ms);
        row.isometry = stats::summarize(iso);
        row.pass_mean = std::abs(row.m.mean) <= rep.z_threshold * std::max(row.m.se, 1e-300);
        row.pass_isometry =
            std::abs(row.isometry.mean) <= rep.z_threshold * std::max(row.isometry.se, 1e-300);
        for (int k = 0; k < K; ++k) row.cross.push_back(stats::summarize(cross[k]));
        if (!(row.pass_mean && row.pass_isometry)) rep.pass = false;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

std::vector<stats::Summary> orthogonality_stat(const Ensemble& ens, std::size_t budget_index,
                                               std::size_t s_idx, std::size_t t_idx) {
    std::vector<const Trajectory*> paths = usable_paths(ens);
    if (s_idx >= t_idx) throw ConfigError("orthogonality_stat: need s < t");
    std::vector<std::vector<double>> samples(3, std::vector<double>(paths.size()));
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const WeakBudget& wb = paths[p]->budgets[budget_index];
        const double ms = m_value(wb, s_idx), mt = m_value(wb, t_idx);
        const double beta1 = paths[p]->beta.empty() ? 0.0 : paths[p]->beta[0][s_idx];
        const double inc = mt - ms;
        samples[0][p] = inc;
        samples[1][p] = inc * std::tanh(ms);
        samples[2][p] = inc * std::tanh(beta1);
    }
    std::vector<stats::Summary> out;
    for (auto& s : samples) out.push_back(stats::summarize(s));
    return out;
}

} // namespace eulermv

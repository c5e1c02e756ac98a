#include "eulermv/noise.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "eulermv/kernels.hpp"
#include "eulermv/rng.hpp"

namespace eulermv {

namespace {

// sup over the grid of the pointwise Euclidean magnitude
double sup_magnitude(const SpectralVectorField& v) {
    const std::size_t np = v.grid().points();
    std::vector<double> mag2(np, 0.0);
    for (int c = 0; c < v.dim(); ++c)
        kernels::fmadd(v.comp[c].phys().data(), v.comp[c].phys().data(), mag2.data(), mag2.data(), np);
    return std::sqrt(kernels::max(mag2.data(), np));
}

} // namespace

NoiseModel NoiseModel::build(const GridSpec& grid, const NoiseConfig& cfg) {
    grid.validate();
    if (cfg.K < 0) throw ConfigError("noise: K must be nonnegative");
    if (cfg.K > 0 && !(cfg.decay_a > 0.5))
        throw ConfigError("noise: decay_a must exceed 1/2 for a summable budget (got " +
                          std::to_string(cfg.decay_a) + ")");

    NoiseModel model;
    model.cfg_ = cfg;
    model.phi_.reserve(cfg.K);

    const double two_pi = 2.0 * std::numbers::pi;
    for (int k = 1; k <= cfg.K; ++k) {
        const double amp = cfg.sigma * std::pow(static_cast<double>(k), -cfg.decay_a);
        const int dir = (k - 1) % grid.dim;
        SpectralVectorField f = SpectralVectorField::zeros(grid);
        if (cfg.family == "constant") {
            std::vector<double> samples(grid.points(), amp);
            f.comp[dir] = SpectralField::from_physical(grid, std::move(samples));
        } else if (cfg.family == "cosine") {
            if (k > grid.modes)
                throw ConfigError("noise: cosine mode k=" + std::to_string(k) +
                                  " leaves the Galerkin band m=" + std::to_string(grid.modes) +
                                  "; lower K or raise the band");
            // cos(2 pi k x_0 / L); varies along the first axis only
            std::vector<double> samples(grid.points());
            const std::size_t stride = grid.points() / static_cast<std::size_t>(grid.n);
            for (std::size_t i = 0; i < grid.points(); ++i) {
                const std::size_t i0 = i / stride;
                samples[i] = amp * std::cos(two_pi * k * static_cast<double>(i0) / grid.n);
            }
            f.comp[dir] = SpectralField::from_physical(grid, std::move(samples));
        } else {
            throw ConfigError("noise: unknown family '" + cfg.family + "' (cosine|constant)");
        }
        model.phi_.push_back(std::move(f));
    }

    double budget = 0.0;
    for (const auto& f : model.phi_) {
        const double s = sup_magnitude(f);
        budget += s * s;
    }
    model.hs_budget_ = budget;
    if (budget > cfg.hs_budget_cap)
        throw ConfigError("noise: Hilbert-Schmidt budget " + std::to_string(budget) +
                          " exceeds the cap " + std::to_string(cfg.hs_budget_cap));
    return model;
}

WienerPath sample_increments(const NoiseModel& model, double dt, int steps, std::uint64_t seed) {
    if (!(dt > 0.0)) throw ConfigError("sample_increments: dt must be positive");
    if (steps < 0) throw ConfigError("sample_increments: steps must be nonnegative");
    WienerPath path;
    path.seed = seed;
    path.times.resize(steps + 1);
    for (int s = 0; s <= steps; ++s) path.times[s] = s * dt;
    path.increments.assign(steps, std::vector<double>(model.K(), 0.0));
    rng::GaussianStream g(rng::derive_seed(seed, {0x57494E45u}));
    const double sd = std::sqrt(dt);
    for (int s = 0; s < steps; ++s)
        for (int k = 0; k < model.K(); ++k) path.increments[s][k] = sd * g.next();
    return path;
}

double chi(double z) {
    auto g = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    if (z <= 0.0) return 1.0;
    if (z >= 1.0) return 0.0;
    const double a = g(1.0 - z), b = g(z);
    return a / (a + b);
}

std::vector<SpectralVectorField> cutoff_phi(const NoiseModel& model, const SpectralVectorField& u,
                                            double eps) {
    if (eps <= 0.0) return model.phi();
    require_same_grid(model.phi().empty() ? u.grid() : model.phi()[0].grid(), u.grid(), "cutoff_phi");

    const std::size_t np = u.grid().points();
    std::vector<double> mag2(np, 0.0);
    for (int c = 0; c < u.dim(); ++c)
        kernels::fmadd(u.comp[c].phys().data(), u.comp[c].phys().data(), mag2.data(), mag2.data(), np);
    std::vector<double> weight(np);
    const double inv_eps = 1.0 / eps;
    for (std::size_t i = 0; i < np; ++i) weight[i] = chi(std::sqrt(mag2[i]) - inv_eps);

    std::vector<SpectralVectorField> out;
    out.reserve(model.phi().size());
    for (const auto& f : model.phi()) {
        SpectralVectorField cut;
        for (int c = 0; c < f.dim(); ++c) {
            std::vector<double> prod(np);
            kernels::mul(f.comp[c].phys().data(), weight.data(), prod.data(), np);
            cut.comp.push_back(SpectralField::from_physical(u.grid(), std::move(prod)));
        }
        out.push_back(std::move(cut));
    }
    return out;
}

double u0_norm(const std::vector<double>& coeffs) {
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        s += coeffs[i] * coeffs[i] / (k * k);
    }
    return std::sqrt(s);
}

} // namespace eulermv

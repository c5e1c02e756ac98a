#pragma once

// Truncated cylindrical Wiener forcing. The K retained coefficient fields
// phi_k are band-limited vector fields with a summable sup-norm budget
// sum_k ||phi_k||_inf^2 (the Hilbert-Schmidt bookkeeping). The velocity
// cut-off multiplies each phi_k pointwise by chi(|u(x)| - 1/eps).

#include <cstdint>
#include <string>
#include <vector>

#include "eulermv/field.hpp"

namespace eulermv {

struct NoiseConfig {
    int K = 0;                 // retained modes; 0 disables forcing
    double sigma = 0.0;        // overall amplitude
    double decay_a = 1.0;      // phi_k ~ k^{-a}; a > 1/2 keeps the budget finite
    double eps_cutoff = 0.0;   // cut-off scale for phi_eps; 0 disables the cut-off
    std::string family = "cosine"; // "cosine" | "constant"
    double hs_budget_cap = 1e6;
};

class NoiseModel {
public:
    NoiseModel() = default;

    // Throws ConfigError when a phi_k would leave the Galerkin band, when the
    // decay exponent makes the budget ill-behaved, or when the computed
    // budget exceeds the configured cap.
    static NoiseModel build(const GridSpec& grid, const NoiseConfig& cfg);

    int K() const { return static_cast<int>(phi_.size()); }
    const std::vector<SpectralVectorField>& phi() const { return phi_; }
    double hs_budget() const { return hs_budget_; }
    const NoiseConfig& config() const { return cfg_; }

private:
    NoiseConfig cfg_;
    std::vector<SpectralVectorField> phi_;
    double hs_budget_ = 0.0;
};

struct WienerPath {
    std::uint64_t seed = 0;
    std::vector<double> times;                   // steps + 1 entries, increasing
    std::vector<std::vector<double>> increments; // [step][mode], N(0, dt)

    int steps() const { return static_cast<int>(increments.size()); }
};

// Gaussian increments with variance dt per mode per step; bit-reproducible
// from the seed.
WienerPath sample_increments(const NoiseModel& model, double dt, int steps, std::uint64_t seed);

// The smooth transition: 1 for z <= 0, 0 for z >= 1, monotone in between.
double chi(double z);

// phi_eps: pointwise chi(|u(x)| - 1/eps) * phi_k(x). eps <= 0 returns phi unchanged.
std::vector<SpectralVectorField> cutoff_phi(const NoiseModel& model, const SpectralVectorField& u,
                                            double eps);

// Auxiliary-space norm sqrt(sum_k alpha_k^2 / k^2), k starting at 1.
double u0_norm(const std::vector<double>& coeffs);

} // namespace eulermv

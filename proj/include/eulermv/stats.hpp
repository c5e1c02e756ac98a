#pragma once

// Small statistics toolbox for the Monte-Carlo verification: compensated
// summation (deterministic, order-independent reductions), summary moments,
// and the normal quantile for Bonferroni-adjusted acceptance thresholds.

#include <cstddef>
#include <vector>

namespace eulermv::stats {

double kahan_sum(const double* x, std::size_t n);

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double var = 0.0; // unbiased
    double se = 0.0;  // standard error of the mean
};

Summary summarize(const std::vector<double>& x);

double correlation(const std::vector<double>& a, const std::vector<double>& b);

// Inverse standard normal CDF (Acklam's rational approximation, |err| < 1e-9).
double normal_quantile(double p);

// z threshold for a family-wise three-sigma level Bonferroni-split across
// `tests` comparisons.
double bonferroni_z(int tests);

} // namespace eulermv::stats

#include "eulermv/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace eulermv::stats {

double kahan_sum(const double* x, std::size_t n) {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = x[i] - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

Summary summarize(const std::vector<double>& x) {
    Summary s;
    s.n = x.size();
    if (s.n == 0) return s;
    s.mean = kahan_sum(x.data(), x.size()) / static_cast<double>(s.n);
    if (s.n > 1) {
        std::vector<double> dev2(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - s.mean;
            dev2[i] = d * d;
        }
        s.var = kahan_sum(dev2.data(), dev2.size()) / static_cast<double>(s.n - 1);
        s.se = std::sqrt(s.var / static_cast<double>(s.n));
    }
    return s;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("correlation: need two samples of equal size >= 2");
    Summary sa = summarize(a), sb = summarize(b);
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - sa.mean) * (b[i] - sb.mean);
    const double cov = kahan_sum(prod.data(), prod.size()) / static_cast<double>(a.size() - 1);
    if (sa.var == 0.0 || sb.var == 0.0) return 0.0;
    return cov / std::sqrt(sa.var * sb.var);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");
    // Acklam's approximation
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

double bonferroni_z(int tests) {
    const double family_alpha = 0.002699796063260207; // two-sided 3-sigma
    const int t = tests < 1 ? 1 : tests;
    return normal_quantile(1.0 - 0.5 * family_alpha / t);
}

} // namespace eulermv::stats

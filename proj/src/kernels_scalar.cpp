#include "eulermv/kernels.hpp"

#include <cmath>
#include <limits>

// Reference kernels. Deliberately plain loops: these define the semantics the
// vector variants are tested against.

namespace eulermv::kernels::detail {
namespace {

void mul_s(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void div_s(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] / b[i];
}

void add_s(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_s(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void scale_s(double alpha, const double* a, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = alpha * a[i];
}

void axpy_s(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void fmadd_s(const double* a, const double* b, const double* c, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::fma(a[i], b[i], c[i]);
}

// Reductions accumulate in four independent bins, mirroring the lane layout
// of the AVX2 variants, so both paths see the same rounding structure.
double sum_s(const double* a, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int l = 0; l < 4; ++l) acc[l] += a[i + l];
    for (; i < n; ++i) acc[i % 4] += a[i];
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double dot_s(const double* a, const double* b, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int l = 0; l < 4; ++l) acc[l] = std::fma(a[i + l], b[i + l], acc[l]);
    for (; i < n; ++i) acc[i % 4] = std::fma(a[i], b[i], acc[i % 4]);
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double triple_dot_s(const double* a, const double* b, const double* c, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int l = 0; l < 4; ++l) acc[l] = std::fma(a[i + l] * b[i + l], c[i + l], acc[l]);
    for (; i < n; ++i) acc[i % 4] = std::fma(a[i] * b[i], c[i], acc[i % 4]);
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double nrm2sq_s(const double* a, std::size_t n) { return dot_s(a, a, n); }

double min_s(const double* a, std::size_t n) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = a[i] < m ? a[i] : m;
    return m;
}

double max_s(const double* a, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = a[i] > m ? a[i] : m;
    return m;
}

double kinetic_sum_s(const double* const* m, int ncomp, const double* rho, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (int l = 0; l < 4; ++l) {
            double q = 0.0;
            for (int c = 0; c < ncomp; ++c) q = std::fma(m[c][i + l], m[c][i + l], q);
            acc[l] += q / rho[i + l];
        }
    }
    for (; i < n; ++i) {
        double q = 0.0;
        for (int c = 0; c < ncomp; ++c) q = std::fma(m[c][i], m[c][i], q);
        acc[i % 4] += q / rho[i];
    }
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

} // namespace

const KernelTable& scalar_table() {
    static const KernelTable t = {
        mul_s, div_s, add_s, sub_s, scale_s, axpy_s, fmadd_s,
        sum_s, dot_s, triple_dot_s, nrm2sq_s, min_s, max_s, kinetic_sum_s,
    };
    return t;
}

} // namespace eulermv::kernels::detail

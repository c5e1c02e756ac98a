#include "eulermv/kernels.hpp"

#if defined(EULERMV_BUILD_AVX2) && defined(__x86_64__)

#include <immintrin.h>
#include <cmath>
#include <limits>

// AVX2/FMA variants. Loop structure mirrors the scalar reference: four lane
// accumulators, identical tail handling, identical final combine, so results
// match the reference bit for bit (checked in tests/test_kernels.cpp).

namespace eulermv::kernels::detail {
namespace {

inline double hcombine(__m256d v) {
    alignas(32) double l[4];
    _mm256_store_pd(l, v);
    return (l[0] + l[2]) + (l[1] + l[3]);
}

void mul_v(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void div_v(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] / b[i];
}

void add_v(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_v(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void scale_v(double alpha, const double* a, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(a + i)));
    for (; i < n; ++i) out[i] = alpha * a[i];
}

void axpy_v(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void fmadd_v(const double* a, const double* b, const double* c, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                                         _mm256_loadu_pd(c + i)));
    for (; i < n; ++i) out[i] = std::fma(a[i], b[i], c[i]);
}

void acc_tail(double* acc, const double* a, std::size_t from, std::size_t n) {
    for (std::size_t i = from; i < n; ++i) acc[i % 4] += a[i];
}

double sum_v(const double* a, std::size_t n) {
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vacc = _mm256_add_pd(vacc, _mm256_loadu_pd(a + i));
    alignas(32) double acc[4];
    _mm256_store_pd(acc, vacc);
    acc_tail(acc, a, i, n);
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double dot_v(const double* a, const double* b, std::size_t n) {
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        vacc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), vacc);
    alignas(32) double acc[4];
    _mm256_store_pd(acc, vacc);
    for (; i < n; ++i) acc[i % 4] = std::fma(a[i], b[i], acc[i % 4]);
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double triple_dot_v(const double* a, const double* b, const double* c, std::size_t n) {
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        vacc = _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + i), vacc);
    }
    alignas(32) double acc[4];
    _mm256_store_pd(acc, vacc);
    for (; i < n; ++i) acc[i % 4] = std::fma(a[i] * b[i], c[i], acc[i % 4]);
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double nrm2sq_v(const double* a, std::size_t n) { return dot_v(a, a, n); }

double min_v(const double* a, std::size_t n) {
    double m = std::numeric_limits<double>::infinity();
    __m256d vm = _mm256_set1_pd(m);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vm = _mm256_min_pd(vm, _mm256_loadu_pd(a + i));
    alignas(32) double l[4];
    _mm256_store_pd(l, vm);
    m = l[0];
    for (int k = 1; k < 4; ++k) m = l[k] < m ? l[k] : m;
    for (; i < n; ++i) m = a[i] < m ? a[i] : m;
    return m;
}

double max_v(const double* a, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    __m256d vm = _mm256_set1_pd(m);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(a + i));
    alignas(32) double l[4];
    _mm256_store_pd(l, vm);
    m = l[0];
    for (int k = 1; k < 4; ++k) m = l[k] > m ? l[k] : m;
    for (; i < n; ++i) m = a[i] > m ? a[i] : m;
    return m;
}

double kinetic_sum_v(const double* const* m, int ncomp, const double* rho, std::size_t n) {
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d q = _mm256_setzero_pd();
        for (int c = 0; c < ncomp; ++c) {
            __m256d mc = _mm256_loadu_pd(m[c] + i);
            q = _mm256_fmadd_pd(mc, mc, q);
        }
        vacc = _mm256_add_pd(vacc, _mm256_div_pd(q, _mm256_loadu_pd(rho + i)));
    }
    alignas(32) double acc[4];
    _mm256_store_pd(acc, vacc);
    for (; i < n; ++i) {
        double q = 0.0;
        for (int c = 0; c < ncomp; ++c) q = std::fma(m[c][i], m[c][i], q);
        acc[i % 4] += q / rho[i];
    }
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

} // namespace

const KernelTable* avx2_table() {
    static const KernelTable t = {
        mul_v, div_v, add_v, sub_v, scale_v, axpy_v, fmadd_v,
        sum_v, dot_v, triple_dot_v, nrm2sq_v, min_v, max_v, kinetic_sum_v,
    };
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
    return &t;
}

} // namespace eulermv::kernels::detail

#else

namespace eulermv::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
} // namespace eulermv::kernels::detail

#endif

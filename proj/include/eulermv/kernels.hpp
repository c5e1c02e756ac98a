#pragma once

// ============================================================================
// Dense array kernels: the arithmetic inner loops of the solver.
//
// Every kernel has a scalar reference implementation and (on x86-64) an AVX2
// variant. The variant is chosen once at startup from CPUID; tests exercise
// both paths and check they agree bit for bit: pointwise kernels perform the
// same IEEE ops per element (std::fma where the vector code fuses), and the
// scalar reductions accumulate in four lane bins mirroring the vector layout,
// so solver output does not depend on which implementation ran.
//
// Selection can be forced with the environment variable EULERMV_KERNELS
// (values: scalar, avx2, auto) or programmatically via force_impl().
// ============================================================================

#include <cstddef>

namespace eulermv::kernels {

enum class Impl { scalar, avx2 };

// Implementation currently wired into the dispatch table.
Impl active_impl();
// True when the host CPU (and this build) can run the AVX2 variants.
bool avx2_available();
// Override dispatch; Impl::avx2 on a non-AVX2 host throws.
void force_impl(Impl impl);
const char* impl_name(Impl impl);

// ---- pointwise --------------------------------------------------------------
void mul(const double* a, const double* b, double* out, std::size_t n);
void div(const double* a, const double* b, double* out, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void scale(double alpha, const double* a, double* out, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// out = a*b + c, fused
void fmadd(const double* a, const double* b, const double* c, double* out, std::size_t n);

// ---- reductions -------------------------------------------------------------
double sum(const double* a, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
// sum of a_i * b_i * c_i
double triple_dot(const double* a, const double* b, const double* c, std::size_t n);
double nrm2sq(const double* a, std::size_t n);
double min(const double* a, std::size_t n);
double max(const double* a, std::size_t n);
// sum over i of (sum_c m[c][i]^2) / rho[i]  -- kinetic energy quadrature
double kinetic_sum(const double* const* m, int ncomp, const double* rho, std::size_t n);

namespace detail {
struct KernelTable {
    void (*mul)(const double*, const double*, double*, std::size_t);
    void (*div)(const double*, const double*, double*, std::size_t);
    void (*add)(const double*, const double*, double*, std::size_t);
    void (*sub)(const double*, const double*, double*, std::size_t);
    void (*scale)(double, const double*, double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*fmadd)(const double*, const double*, const double*, double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*triple_dot)(const double*, const double*, const double*, std::size_t);
    double (*nrm2sq)(const double*, std::size_t);
    double (*min)(const double*, std::size_t);
    double (*max)(const double*, std::size_t);
    double (*kinetic_sum)(const double* const*, int, const double*, std::size_t);
};
const KernelTable& scalar_table();
const KernelTable* avx2_table(); // nullptr when not built or not supported
} // namespace detail

} // namespace eulermv::kernels

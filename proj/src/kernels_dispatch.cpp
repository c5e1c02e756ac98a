#include "eulermv/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace eulermv::kernels {

namespace {

struct Dispatch {
    const detail::KernelTable* table;
    Impl impl;

    Dispatch() {
        const detail::KernelTable* v = detail::avx2_table();
        impl = v ? Impl::avx2 : Impl::scalar;
        if (const char* env = std::getenv("EULERMV_KERNELS")) {
            if (std::strcmp(env, "scalar") == 0) impl = Impl::scalar;
            else if (std::strcmp(env, "avx2") == 0 && v) impl = Impl::avx2;
            // "auto" or anything else keeps the detected choice
        }
        table = (impl == Impl::avx2) ? v : &detail::scalar_table();
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

} // namespace

Impl active_impl() { return dispatch().impl; }

bool avx2_available() { return detail::avx2_table() != nullptr; }

void force_impl(Impl impl) {
    Dispatch& d = dispatch();
    if (impl == Impl::avx2) {
        const detail::KernelTable* v = detail::avx2_table();
        if (!v) throw std::runtime_error("kernels: AVX2 not available on this host");
        d.table = v;
    } else {
        d.table = &detail::scalar_table();
    }
    d.impl = impl;
}

const char* impl_name(Impl impl) { return impl == Impl::avx2 ? "avx2" : "scalar"; }

void mul(const double* a, const double* b, double* out, std::size_t n) { dispatch().table->mul(a, b, out, n); }
void div(const double* a, const double* b, double* out, std::size_t n) { dispatch().table->div(a, b, out, n); }
void add(const double* a, const double* b, double* out, std::size_t n) { dispatch().table->add(a, b, out, n); }
void sub(const double* a, const double* b, double* out, std::size_t n) { dispatch().table->sub(a, b, out, n); }
void scale(double alpha, const double* a, double* out, std::size_t n) { dispatch().table->scale(alpha, a, out, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { dispatch().table->axpy(alpha, x, y, n); }
void fmadd(const double* a, const double* b, const double* c, double* out, std::size_t n) {
    dispatch().table->fmadd(a, b, c, out, n);
}
double sum(const double* a, std::size_t n) { return dispatch().table->sum(a, n); }
double dot(const double* a, const double* b, std::size_t n) { return dispatch().table->dot(a, b, n); }
double triple_dot(const double* a, const double* b, const double* c, std::size_t n) {
    return dispatch().table->triple_dot(a, b, c, n);
}
double nrm2sq(const double* a, std::size_t n) { return dispatch().table->nrm2sq(a, n); }
double min(const double* a, std::size_t n) { return dispatch().table->min(a, n); }
double max(const double* a, std::size_t n) { return dispatch().table->max(a, n); }
double kinetic_sum(const double* const* m, int ncomp, const double* rho, std::size_t n) {
    return dispatch().table->kinetic_sum(m, ncomp, rho, n);
}

} // namespace eulermv::kernels

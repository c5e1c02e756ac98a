#include "eulermv/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "eulermv/kernels.hpp"

namespace eulermv {

// ============================================================================
// GridSpec
// ============================================================================

GridSpec::GridSpec(int dim_, int n_, int modes_, double len) : dim(dim_), n(n_), modes(modes_) {
    length = {len, len, len};
    validate();
}

void GridSpec::validate() const {
    if (dim < 1 || dim > 3)
        throw ConfigError("grid: dim must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
    if (n <= 0 || n % 2 != 0)
        throw ConfigError("grid: points_per_dim must be even and positive (got " + std::to_string(n) + ")");
    if (modes < 1)
        throw ConfigError("grid: galerkin_modes must be positive (got " + std::to_string(modes) + ")");
    if (3 * modes > n)
        throw ConfigError("grid: galerkin_modes violates the 2/3 dealiasing rule, need 3*m <= N (m=" +
                          std::to_string(modes) + ", N=" + std::to_string(n) + ")");
    for (int a = 0; a < dim; ++a)
        if (!(length[a] > 0.0)) throw ConfigError("grid: domain_length must be positive");
}

std::size_t GridSpec::points() const {
    std::size_t p = 1;
    for (int a = 0; a < dim; ++a) p *= static_cast<std::size_t>(n);
    return p;
}

std::size_t GridSpec::spec_size() const {
    std::size_t p = static_cast<std::size_t>(half());
    for (int a = 0; a < dim - 1; ++a) p *= static_cast<std::size_t>(n);
    return p;
}

double GridSpec::volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= length[a];
    return v;
}

double GridSpec::cell_volume() const { return volume() / static_cast<double>(points()); }

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
    if (!(a == b)) throw ConfigError(std::string(where) + ": fields live on different grids");
}

// ============================================================================
// FFT plan cache
// ============================================================================

namespace fft {
namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// Plans are created once per (dim, n) with FFTW_UNALIGNED so they can be
// executed on arbitrary user buffers via the new-array interface.
const PlanPair& plans_for(const GridSpec& g) {
    static std::map<std::pair<int, int>, PlanPair> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto key = std::make_pair(g.dim, g.n);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    int dims[3] = {g.n, g.n, g.n};
    std::size_t np = g.points(), ns = g.spec_size();
    double* rbuf = fftw_alloc_real(np);
    fftw_complex* cbuf = fftw_alloc_complex(ns);
    PlanPair p;
    p.fwd = fftw_plan_dft_r2c(g.dim, dims, rbuf, cbuf, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_c2r(g.dim, dims, cbuf, rbuf, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(rbuf);
    fftw_free(cbuf);
    return cache.emplace(key, p).first->second;
}

} // namespace

void forward(const GridSpec& g, const double* phys, std::complex<double>* spec) {
    const PlanPair& p = plans_for(g);
    // r2c preserves its input, but the API wants a mutable pointer
    std::vector<double> in(phys, phys + g.points());
    fftw_execute_dft_r2c(p.fwd, in.data(), reinterpret_cast<fftw_complex*>(spec));
    const double norm = 1.0 / static_cast<double>(g.points());
    for (std::size_t i = 0, ns = g.spec_size(); i < ns; ++i) spec[i] *= norm;
}

void backward(const GridSpec& g, const std::complex<double>* spec, double* phys) {
    const PlanPair& p = plans_for(g);
    // c2r destroys its input, so run on a scratch copy
    std::vector<std::complex<double>> in(spec, spec + g.spec_size());
    fftw_execute_dft_c2r(p.bwd, reinterpret_cast<fftw_complex*>(in.data()), phys);
}

} // namespace fft

// ============================================================================
// SpectralField
// ============================================================================

void SpectralField::sync_from_phys() {
    spec_.resize(grid_.spec_size());
    fft::forward(grid_, phys_.data(), spec_.data());
}

void SpectralField::resync_phys_only() {
    phys_.resize(grid_.points());
    fft::backward(grid_, spec_.data(), phys_.data());
}

SpectralField SpectralField::zeros(const GridSpec& g) {
    g.validate();
    SpectralField f;
    f.grid_ = g;
    f.phys_.assign(g.points(), 0.0);
    f.spec_.assign(g.spec_size(), {0.0, 0.0});
    return f;
}

SpectralField SpectralField::from_physical(const GridSpec& g, std::vector<double> samples) {
    g.validate();
    if (samples.size() != g.points())
        throw ConfigError("from_physical: sample count does not match the grid");
    SpectralField f;
    f.grid_ = g;
    f.phys_ = std::move(samples);
    f.sync_from_phys();
    return f;
}

SpectralField SpectralField::from_spectral(const GridSpec& g, std::vector<std::complex<double>> coeffs) {
    g.validate();
    if (coeffs.size() != g.spec_size())
        throw ConfigError("from_spectral: coefficient count does not match the grid");
    SpectralField f;
    f.grid_ = g;
    f.spec_ = std::move(coeffs);
    f.resync_phys_only();
    f.sync_from_phys(); // symmetrize: views become an exact DFT pair
    return f;
}

void SpectralField::wavevector(std::size_t idx, int k[3]) const {
    const int nh = grid_.half();
    int rem = static_cast<int>(idx);
    k[0] = k[1] = k[2] = 0;
    // last axis is the halved one
    int last = rem % nh;
    rem /= nh;
    for (int a = grid_.dim - 2; a >= 0; --a) {
        int i = rem % grid_.n;
        rem /= grid_.n;
        k[a] = i <= grid_.n / 2 ? i : i - grid_.n;
    }
    k[grid_.dim - 1] = last;
}

double SpectralField::hermitian_weight(std::size_t idx) const {
    const int nh = grid_.half();
    int last = static_cast<int>(idx) % nh;
    return (last == 0 || last == grid_.n / 2) ? 1.0 : 2.0;
}

SpectralField SpectralField::projected(int m) const {
    if (m < 0 || 3 * m > grid_.n)
        throw ConfigError("project: band m=" + std::to_string(m) +
                          " exceeds the 2/3 dealiasing capability of N=" + std::to_string(grid_.n));
    SpectralField out;
    out.grid_ = grid_;
    out.spec_ = spec_;
    int k[3];
    for (std::size_t i = 0; i < out.spec_.size(); ++i) {
        wavevector(i, k);
        bool keep = true;
        for (int a = 0; a < grid_.dim; ++a)
            if (std::abs(k[a]) > m) keep = false;
        if (!keep) out.spec_[i] = {0.0, 0.0};
    }
    out.resync_phys_only();
    return out;
}

SpectralField SpectralField::derivative(int axis) const {
    if (axis < 0 || axis >= grid_.dim) throw ConfigError("derivative: axis out of range");
    SpectralField out;
    out.grid_ = grid_;
    out.spec_ = spec_;
    const double two_pi = 2.0 * std::numbers::pi;
    int k[3];
    for (std::size_t i = 0; i < out.spec_.size(); ++i) {
        wavevector(i, k);
        bool nyquist = false;
        for (int a = 0; a < grid_.dim; ++a)
            if (std::abs(k[a]) == grid_.n / 2 && k[a] != 0) nyquist = true;
        if (nyquist) {
            // odd derivative of the unpaired Nyquist mode is ill-defined
            out.spec_[i] = {0.0, 0.0};
            continue;
        }
        const double kappa = two_pi * k[axis] / grid_.length[axis];
        out.spec_[i] *= std::complex<double>(0.0, kappa);
    }
    out.resync_phys_only();
    return out;
}

SpectralField SpectralField::laplacian() const {
    SpectralField out;
    out.grid_ = grid_;
    out.spec_ = spec_;
    const double two_pi = 2.0 * std::numbers::pi;
    int k[3];
    for (std::size_t i = 0; i < out.spec_.size(); ++i) {
        wavevector(i, k);
        double k2 = 0.0;
        for (int a = 0; a < grid_.dim; ++a) {
            double kappa = two_pi * k[a] / grid_.length[a];
            k2 += kappa * kappa;
        }
        out.spec_[i] *= -k2;
    }
    out.resync_phys_only();
    return out;
}

double SpectralField::integral() const { return spec_[0].real() * grid_.volume(); }

double SpectralField::mean() const { return spec_[0].real(); }

double SpectralField::l2sq() const {
    return kernels::nrm2sq(phys_.data(), phys_.size()) * grid_.cell_volume();
}

double SpectralField::min_value() const { return kernels::min(phys_.data(), phys_.size()); }

double SpectralField::max_value() const { return kernels::max(phys_.data(), phys_.size()); }

double SpectralField::eval_at(const std::array<double, 3>& x) const {
    const double two_pi = 2.0 * std::numbers::pi;
    double acc = 0.0;
    int k[3];
    for (std::size_t i = 0; i < spec_.size(); ++i) {
        wavevector(i, k);
        double phase = 0.0;
        for (int a = 0; a < grid_.dim; ++a) phase += two_pi * k[a] * x[a] / grid_.length[a];
        acc += hermitian_weight(i) *
               (spec_[i].real() * std::cos(phase) - spec_[i].imag() * std::sin(phase));
    }
    return acc;
}

SpectralField SpectralField::scaled(double alpha) const {
    SpectralField out;
    out.grid_ = grid_;
    out.phys_.resize(phys_.size());
    out.spec_.resize(spec_.size());
    kernels::scale(alpha, phys_.data(), out.phys_.data(), phys_.size());
    for (std::size_t i = 0; i < spec_.size(); ++i) out.spec_[i] = alpha * spec_[i];
    return out;
}

void SpectralField::axpy_inplace(double alpha, const SpectralField& x) {
    require_same_grid(grid_, x.grid_, "axpy");
    kernels::axpy(alpha, x.phys_.data(), phys_.data(), phys_.size());
    for (std::size_t i = 0; i < spec_.size(); ++i) spec_[i] += alpha * x.spec_[i];
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    require_same_grid(a.grid_, b.grid_, "operator+");
    SpectralField out;
    out.grid_ = a.grid_;
    out.phys_.resize(a.phys_.size());
    out.spec_.resize(a.spec_.size());
    kernels::add(a.phys_.data(), b.phys_.data(), out.phys_.data(), a.phys_.size());
    for (std::size_t i = 0; i < a.spec_.size(); ++i) out.spec_[i] = a.spec_[i] + b.spec_[i];
    return out;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    require_same_grid(a.grid_, b.grid_, "operator-");
    SpectralField out;
    out.grid_ = a.grid_;
    out.phys_.resize(a.phys_.size());
    out.spec_.resize(a.spec_.size());
    kernels::sub(a.phys_.data(), b.phys_.data(), out.phys_.data(), a.phys_.size());
    for (std::size_t i = 0; i < a.spec_.size(); ++i) out.spec_[i] = a.spec_[i] - b.spec_[i];
    return out;
}

SpectralField SpectralField::multiply(const SpectralField& a, const SpectralField& b) {
    require_same_grid(a.grid_, b.grid_, "multiply");
    std::vector<double> prod(a.phys_.size());
    kernels::mul(a.phys_.data(), b.phys_.data(), prod.data(), prod.size());
    return from_physical(a.grid_, std::move(prod));
}

SpectralField SpectralField::divide(const SpectralField& a, const SpectralField& b) {
    require_same_grid(a.grid_, b.grid_, "divide");
    std::vector<double> quot(a.phys_.size());
    kernels::div(a.phys_.data(), b.phys_.data(), quot.data(), quot.size());
    return from_physical(a.grid_, std::move(quot));
}

// ============================================================================
// SpectralVectorField
// ============================================================================

SpectralVectorField SpectralVectorField::zeros(const GridSpec& g) {
    SpectralVectorField v;
    v.comp.reserve(g.dim);
    for (int a = 0; a < g.dim; ++a) v.comp.push_back(SpectralField::zeros(g));
    return v;
}

const GridSpec& SpectralVectorField::grid() const {
    if (comp.empty()) throw ConfigError("vector field has no components");
    return comp[0].grid();
}

SpectralVectorField SpectralVectorField::projected(int m) const {
    SpectralVectorField out;
    for (const auto& c : comp) out.comp.push_back(c.projected(m));
    return out;
}

SpectralVectorField SpectralVectorField::scaled(double alpha) const {
    SpectralVectorField out;
    for (const auto& c : comp) out.comp.push_back(c.scaled(alpha));
    return out;
}

void SpectralVectorField::axpy_inplace(double alpha, const SpectralVectorField& x) {
    for (std::size_t a = 0; a < comp.size(); ++a) comp[a].axpy_inplace(alpha, x.comp[a]);
}

double SpectralVectorField::l2sq() const {
    double s = 0.0;
    for (const auto& c : comp) s += c.l2sq();
    return s;
}

double SpectralVectorField::l2norm() const { return std::sqrt(l2sq()); }

SpectralVectorField operator+(const SpectralVectorField& a, const SpectralVectorField& b) {
    SpectralVectorField out;
    for (std::size_t i = 0; i < a.comp.size(); ++i) out.comp.push_back(a.comp[i] + b.comp[i]);
    return out;
}

SpectralVectorField operator-(const SpectralVectorField& a, const SpectralVectorField& b) {
    SpectralVectorField out;
    for (std::size_t i = 0; i < a.comp.size(); ++i) out.comp.push_back(a.comp[i] - b.comp[i]);
    return out;
}

// ============================================================================
// Differential operators and inner products
// ============================================================================

SpectralVectorField grad(const SpectralField& f) {
    SpectralVectorField out;
    for (int a = 0; a < f.grid().dim; ++a) out.comp.push_back(f.derivative(a));
    return out;
}

SpectralField div(const SpectralVectorField& u) {
    SpectralField out = u.comp[0].derivative(0);
    for (int a = 1; a < u.dim(); ++a) out.axpy_inplace(1.0, u.comp[a].derivative(a));
    return out;
}

SpectralVectorField tensor_div(const std::vector<std::vector<SpectralField>>& T) {
    SpectralVectorField out;
    const int d = static_cast<int>(T.size());
    for (int i = 0; i < d; ++i) {
        SpectralField row = T[i][0].derivative(0);
        for (int j = 1; j < d; ++j) row.axpy_inplace(1.0, T[i][j].derivative(j));
        out.comp.push_back(std::move(row));
    }
    return out;
}

double l2_inner(const SpectralField& a, const SpectralField& b) {
    require_same_grid(a.grid(), b.grid(), "l2_inner");
    return kernels::dot(a.phys().data(), b.phys().data(), a.phys().size()) * a.grid().cell_volume();
}

double l2_inner(const SpectralVectorField& a, const SpectralVectorField& b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.comp.size(); ++c) s += l2_inner(a.comp[c], b.comp[c]);
    return s;
}

double sigma6(const double kappa[3], int dim) {
    // plain sum over multi-indices |alpha| = 3 of kappa^(2 alpha)
    double s = 0.0;
    auto p = [](double x, int e) {
        double r = 1.0;
        for (int i = 0; i < e; ++i) r *= x * x;
        return r;
    };
    if (dim == 1) {
        s = p(kappa[0], 3);
    } else if (dim == 2) {
        for (int a = 0; a <= 3; ++a) s += p(kappa[0], a) * p(kappa[1], 3 - a);
    } else {
        for (int a = 0; a <= 3; ++a)
            for (int b = 0; b + a <= 3; ++b) s += p(kappa[0], a) * p(kappa[1], b) * p(kappa[2], 3 - a - b);
    }
    return s;
}

namespace {

double symbol_weighted_inner(const SpectralVectorField& u, const SpectralVectorField& v) {
    const GridSpec& g = u.grid();
    const double two_pi = 2.0 * std::numbers::pi;
    double total = 0.0;
    int k[3];
    double kappa[3] = {0, 0, 0};
    for (std::size_t i = 0, ns = g.spec_size(); i < ns; ++i) {
        u.comp[0].wavevector(i, k);
        for (int a = 0; a < g.dim; ++a) kappa[a] = two_pi * k[a] / g.length[a];
        const double w = u.comp[0].hermitian_weight(i) * (sigma6(kappa, g.dim) + 1.0);
        double re = 0.0;
        for (int c = 0; c < u.dim(); ++c) {
            const std::complex<double>&uc = u.comp[c].spec()[i];
            const std::complex<double>&vc = v.comp[c].spec()[i];
            re += uc.real() * vc.real() + uc.imag() * vc.imag();
        }
        total += w * re;
    }
    return total * g.volume();
}

} // namespace

double sobolev_inner_3(const SpectralVectorField& u, const SpectralVectorField& v) {
    require_same_grid(u.grid(), v.grid(), "sobolev_inner_3");
    return symbol_weighted_inner(u, v);
}

SpectralVectorField viscosity_apply(const SpectralVectorField& u) {
    const GridSpec& g = u.grid();
    const double two_pi = 2.0 * std::numbers::pi;
    SpectralVectorField out;
    int k[3];
    double kappa[3] = {0, 0, 0};
    for (int c = 0; c < u.dim(); ++c) {
        std::vector<std::complex<double>> spec = u.comp[c].spec();
        for (std::size_t i = 0; i < spec.size(); ++i) {
            u.comp[c].wavevector(i, k);
            for (int a = 0; a < g.dim; ++a) kappa[a] = two_pi * k[a] / g.length[a];
            spec[i] *= -(sigma6(kappa, g.dim) + 1.0);
        }
        out.comp.push_back(SpectralField::from_spectral(g, std::move(spec)));
    }
    return out;
}

} // namespace eulermv

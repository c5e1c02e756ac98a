#pragma once

// ============================================================================
// Periodic scalar/vector fields on the flat torus T^d, d in {1,2,3}.
//
// A field carries two views that are kept consistent at all times:
//   physical  -- real samples on the N^d collocation grid, row-major over
//                (i_0, ..., i_{d-1}) with x_a = i_a * L_a / N,
//   spectral  -- complex coefficients in the real-to-complex half layout.
//
// Canonical coefficient layout (this is the one layout used everywhere,
// including field dumps): dimensions N x ... x N x (N/2+1); entry at index
// (i_0, ..., i_{d-1}) is the coefficient c_k of exp(2*pi*i k.x / L) with
//   k_a = i_a <= N/2 ? i_a : i_a - N   on full axes,
//   k_{d-1} = i_{d-1}                  on the last (halved) axis.
// Hermitian symmetry c_{-k} = conj(c_k) is implicit in the storage. The
// normalization is such that f(x) = sum_k c_k exp(2*pi*i k.x / L), i.e. the
// zero mode is the mean value of the field.
//
// The Galerkin band is the sup-ball |k|_inf <= m with 3m <= N (2/3 rule), so
// pointwise quadratic products followed by projection are alias-free.
// ============================================================================

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "eulermv/errors.hpp"

namespace eulermv {

struct GridSpec {
    int dim = 1;
    int n = 8;       // collocation points per dimension, even
    int modes = 2;   // Galerkin band m, 3m <= n
    std::array<double, 3> length{1.0, 1.0, 1.0};

    GridSpec() = default;
    GridSpec(int dim_, int n_, int modes_, double len = 1.0);

    void validate() const; // throws ConfigError on violated invariants

    std::size_t points() const;     // n^dim
    std::size_t spec_size() const;  // n^(dim-1) * (n/2+1)
    int half() const { return n / 2 + 1; }
    double volume() const;
    double cell_volume() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Low-level transforms between the two views (FFTW behind a plan cache).
// `spec` must have grid.spec_size() entries, `phys` grid.points().
namespace fft {
void forward(const GridSpec& g, const double* phys, std::complex<double>* spec);
void backward(const GridSpec& g, const std::complex<double>* spec, double* phys);
} // namespace fft

class SpectralField {
public:
    SpectralField() = default;

    static SpectralField zeros(const GridSpec& g);
    static SpectralField from_physical(const GridSpec& g, std::vector<double> samples);
    // Symmetrizes through a transform round trip so both views form an exact
    // discrete Fourier pair even if the given coefficients were not Hermitian.
    static SpectralField from_spectral(const GridSpec& g, std::vector<std::complex<double>> coeffs);

    const GridSpec& grid() const { return grid_; }
    const std::vector<double>& phys() const { return phys_; }
    const std::vector<std::complex<double>>& spec() const { return spec_; }

    // Signed integer wavevector of a spectral storage index.
    void wavevector(std::size_t idx, int k[3]) const;
    // 2 when the conjugate partner is not stored (interior last-axis index),
    // 1 on the self-paired planes k_last in {0, N/2}.
    double hermitian_weight(std::size_t idx) const;

    // Galerkin projection onto |k|_inf <= m. Idempotent; kept coefficients
    // are exactly the input's. Throws ConfigError when 3m > n.
    SpectralField projected(int m) const;
    SpectralField derivative(int axis) const;
    SpectralField laplacian() const;

    double integral() const;
    double mean() const;
    double l2sq() const; // integral of f^2, collocation quadrature
    double min_value() const;
    double max_value() const;

    // exact trigonometric interpolation at an arbitrary point (direct
    // evaluation of the stored Fourier sum)
    double eval_at(const std::array<double, 3>& x) const;

    SpectralField scaled(double alpha) const;
    void axpy_inplace(double alpha, const SpectralField& x); // this += alpha x

    friend SpectralField operator+(const SpectralField& a, const SpectralField& b);
    friend SpectralField operator-(const SpectralField& a, const SpectralField& b);

    static SpectralField multiply(const SpectralField& a, const SpectralField& b);
    static SpectralField divide(const SpectralField& a, const SpectralField& b);

private:
    GridSpec grid_;
    std::vector<double> phys_;
    std::vector<std::complex<double>> spec_;

    void sync_from_phys();       // spec = fft(phys)
    void resync_phys_only();     // phys = ifft(spec); spec untouched
};

struct SpectralVectorField {
    std::vector<SpectralField> comp;

    static SpectralVectorField zeros(const GridSpec& g);
    const GridSpec& grid() const;
    int dim() const { return static_cast<int>(comp.size()); }

    SpectralVectorField projected(int m) const;
    SpectralVectorField scaled(double alpha) const;
    void axpy_inplace(double alpha, const SpectralVectorField& x);
    double l2sq() const;
    double l2norm() const;

    friend SpectralVectorField operator+(const SpectralVectorField& a, const SpectralVectorField& b);
    friend SpectralVectorField operator-(const SpectralVectorField& a, const SpectralVectorField& b);
};

// ---- differential operators (exact on the spectral representation) ---------
SpectralVectorField grad(const SpectralField& f);
SpectralField div(const SpectralVectorField& u);
// Row-wise divergence of a d x d tensor field: out_i = sum_j d_j T[i][j].
SpectralVectorField tensor_div(const std::vector<std::vector<SpectralField>>& T);

// ---- inner products ---------------------------------------------------------
double l2_inner(const SpectralField& a, const SpectralField& b);
double l2_inner(const SpectralVectorField& a, const SpectralVectorField& b);

// Scalar product on W^{3,2}: sum over |alpha|=3 of the third-derivative
// pairings plus the L^2 term, evaluated as a spectral sum.
double sobolev_inner_3(const SpectralVectorField& u, const SpectralVectorField& v);

// Sixth-order regularizer: diagonal symbol -(sigma6(kappa) + 1) where sigma6
// is the plain multi-index sum over |alpha|=3 of kappa^(2 alpha), chosen so
// that l2_inner(viscosity_apply(u), u) == -sobolev_inner_3(u, u) exactly.
SpectralVectorField viscosity_apply(const SpectralVectorField& u);

// sigma6 for a real wavevector kappa (exposed for tests)
double sigma6(const double kappa[3], int dim);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

} // namespace eulermv

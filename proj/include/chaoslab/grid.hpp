#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chaoslab/fft.hpp"

namespace chaoslab {

inline constexpr double kTolMass = 1e-8;
inline constexpr double kTolNeg = 1e-12;

/// Uniform periodic grid on [-L, L)^dim with n nodes per axis (n a power of
/// two, n >= 8). Node j along an axis sits at x = -L + j*h, h = 2L/n; the
/// origin is the node with index n/2 on every axis.
struct Grid {
  int dim = 1;
  double L = 1.0;
  std::int64_t n = 8;

  Grid() = default;
  Grid(int dim_, double L_, std::int64_t n_);

  double h() const { return 2.0 * L / static_cast<double>(n); }
  std::int64_t size() const;
  /// Coordinate of node index j (0 <= j < n) along any axis.
  double node(std::int64_t j) const { return -L + static_cast<double>(j) * h(); }
  /// Row-major flat index from per-axis indices (only the first dim used).
  std::int64_t flat(const std::array<std::int64_t, 3>& idx) const;
  /// Frequency (cycles per unit length) of DFT index k along any axis;
  /// k = n/2 maps to the positive Nyquist frequency.
  double freq(std::int64_t k) const;
  /// Wrap a coordinate into [-L, L).
  double wrap(double x) const;

  bool operator==(const Grid& o) const {
    return dim == o.dim && L == o.L && n == o.n;
  }
};

/// Scalar field sampled on a Grid, stored row-major. `is_density` marks
/// fields validated as probability densities (mass within kTolMass of 1,
/// no value below -kTolNeg).
struct GridFunction {
  Grid grid;
  std::vector<double> values;
  bool is_density = false;

  GridFunction() = default;
  explicit GridFunction(const Grid& g);
  double& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
};

/// Complex DFT coefficients of a GridFunction in raw DFT index order,
/// scaled to the continuum convention: spectrum(u)(xi_k) ~= Integral of
/// u(x) exp(-2*pi*i*xi_k.x) dx over the torus.
struct Spectrum {
  Grid grid;
  std::vector<std::complex<double>> values;
};

using SymbolFn = std::function<std::complex<double>(const std::array<double, 3>&)>;

GridFunction make_grid_function(const Grid& g,
                                const std::function<double(const std::array<double, 3>&)>& f);

/// h^dim * sum of values (deterministic blocked reduction).
double quadrature(const GridFunction& f);

double l1_norm(const GridFunction& f);
double l2_norm(const GridFunction& f);
double linf_norm(const GridFunction& f);
double mean_value(const GridFunction& f);

/// Continuum-convention DFT and its inverse.
Spectrum spectrum(const GridFunction& f);
GridFunction inv_spectrum(const Spectrum& s);

/// Periodic convolution via FFT: (f*g)(x) = Integral f(y) g(x-y) dy.
GridFunction convolve(const GridFunction& f, const GridFunction& g);

/// Fourier multiplier: F^{-1}[ m(xi) F[f] ]. The symbol is evaluated at the
/// grid frequencies (Nyquist index maps to the positive frequency); the
/// result is the real part of the inverse transform.
GridFunction apply_multiplier(const GridFunction& f, const SymbolFn& m);

/// Multiplier applied to precomputed spectrum values (symbol array in raw
/// DFT order), for callers that build symbols directly.
GridFunction apply_symbol_array(const GridFunction& f,
                                const std::vector<std::complex<double>>& sym);

/// Evaluate the symbol m at every grid frequency, raw DFT order.
std::vector<std::complex<double>> symbol_on_grid(const Grid& g, const SymbolFn& m);

/// Bessel-potential symbol (1 + 4*pi^2*|xi|^2)^(s/2).
SymbolFn bessel_symbol(double s);

enum class Lp { L1, L2, Linf };

/// Bessel-potential Sobolev norm: L^p norm of apply_multiplier(f, bessel(s)).
/// Fractional s requires p = L2; integer s is allowed for all p.
double sobolev_norm(const GridFunction& f, double s, Lp p);

/// Periodic multilinear interpolation at an arbitrary point.
double evaluate_at(const GridFunction& f, const std::array<double, 3>& x);

/// f(-x) on the periodic grid.
GridFunction reflect(const GridFunction& f);

/// Spectral partial derivative along `axis`; the Nyquist mode on that axis
/// is zeroed (the odd symbol has no faithful representative there).
GridFunction spectral_derivative(const GridFunction& f, int axis);

/// Sum over all axes except `keep_axis`, times h^(dim-1): the marginal of a
/// multi-dimensional density.
GridFunction marginal(const GridFunction& f, int keep_axis);

/// Outer product of two 1D functions onto the 2D grid with the same axis n/L.
GridFunction outer_product(const GridFunction& a, const GridFunction& b);

/// Point-sample every `factor`-th node of a finer grid sharing the same L
/// (fine.n = factor * coarse.n); node coordinates coincide exactly.
GridFunction downsample(const GridFunction& fine, std::int64_t factor);

/// Validate the density invariants and set the flag (throws NumericalError).
void validate_density(GridFunction& f, const std::string& what);

/// Clip negative values to zero and rescale to unit mass; returns the number
/// of clipped nodes. Sets the density flag.
std::int64_t renormalize_density(GridFunction& f);

} // namespace chaoslab

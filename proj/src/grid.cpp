#include "chaoslab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "chaoslab/errors.hpp"
#include "chaoslab/reduce.hpp"

namespace chaoslab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double blocked_sum(const double* x, std::size_t n, bool parallel) {
  if (n == 0) return 0.0;
  const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = std::min(lo + kReduceBlock, n);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i];
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (std::size_t b = 0; b < nblocks; ++b) total += partial[b];
  return total;
}

double blocked_dot(const double* x, const double* y, std::size_t n, bool parallel) {
  if (n == 0) return 0.0;
  const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = std::min(lo + kReduceBlock, n);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (std::size_t b = 0; b < nblocks; ++b) total += partial[b];
  return total;
}

Grid::Grid(int dim_, double L_, std::int64_t n_) : dim(dim_), L(L_), n(n_) {
  if (dim < 1 || dim > 3)
    throw ValidationError("grid.dim", "grid dim must be 1, 2, or 3");
  if (!(L > 0.0))
    throw ValidationError("grid.L", "grid half-width L must be positive");
  if (n < 8 || !fft::is_pow2(static_cast<std::size_t>(n)))
    throw ValidationError("grid.n", "grid n must be a power of two with n >= 8");
}

std::int64_t Grid::size() const {
  std::int64_t s = 1;
  for (int d = 0; d < dim; ++d) s *= n;
  return s;
}

std::int64_t Grid::flat(const std::array<std::int64_t, 3>& idx) const {
  std::int64_t f = 0;
  for (int d = 0; d < dim; ++d) f = f * n + idx[static_cast<std::size_t>(d)];
  return f;
}

double Grid::freq(std::int64_t k) const {
  const double kk = (k <= n / 2) ? static_cast<double>(k) : static_cast<double>(k - n);
  return kk / (2.0 * L);
}

double Grid::wrap(double x) const {
  const double w = 2.0 * L;
  double y = x - w * std::floor((x + L) / w);
  if (y >= L) y -= w;   // guard against floating rounding at the seam
  if (y < -L) y += w;
  return y;
}

GridFunction::GridFunction(const Grid& g)
    : grid(g), values(static_cast<std::size_t>(g.size()), 0.0) {}

GridFunction make_grid_function(
    const Grid& g, const std::function<double(const std::array<double, 3>&)>& f) {
  GridFunction out(g);
  const std::int64_t n = g.n;
  std::array<std::int64_t, 3> idx{0, 0, 0};
  std::array<double, 3> x{0.0, 0.0, 0.0};
  std::int64_t flatpos = 0;
  const std::int64_t n1 = (g.dim >= 2) ? n : 1;
  const std::int64_t n2 = (g.dim >= 3) ? n : 1;
  for (idx[0] = 0; idx[0] < n; ++idx[0]) {
    x[0] = g.node(idx[0]);
    for (idx[1] = 0; idx[1] < n1; ++idx[1]) {
      x[1] = (g.dim >= 2) ? g.node(idx[1]) : 0.0;
      for (idx[2] = 0; idx[2] < n2; ++idx[2]) {
        x[2] = (g.dim >= 3) ? g.node(idx[2]) : 0.0;
        out.values[static_cast<std::size_t>(flatpos++)] = f(x);
      }
    }
  }
  return out;
}

double quadrature(const GridFunction& f) {
  const double hd = std::pow(f.grid.h(), f.grid.dim);
  return hd * blocked_sum(f.values.data(), f.values.size(), true);
}

double l1_norm(const GridFunction& f) {
  std::vector<double> a(f.values.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(f.values[i]);
  const double hd = std::pow(f.grid.h(), f.grid.dim);
  return hd * blocked_sum(a.data(), a.size(), true);
}

double l2_norm(const GridFunction& f) {
  const double hd = std::pow(f.grid.h(), f.grid.dim);
  return std::sqrt(hd * blocked_dot(f.values.data(), f.values.data(), f.values.size(), true));
}

double linf_norm(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double mean_value(const GridFunction& f) {
  return quadrature(f) / std::pow(2.0 * f.grid.L, f.grid.dim);
}

namespace {

std::array<std::size_t, 3> dims_of(const Grid& g) {
  std::array<std::size_t, 3> d{1, 1, 1};
  for (int a = 0; a < g.dim; ++a) d[static_cast<std::size_t>(a)] = static_cast<std::size_t>(g.n);
  return d;
}

// Multiply buf[k] by sign(k)*scale where sign(k) = (-1)^(k0+k1+...) is the
// phase that recenters the DFT origin at the grid node x = 0.
void centering_phase(std::vector<std::complex<double>>& buf, const Grid& g, double scale) {
  const std::int64_t n = g.n;
  const std::int64_t n1 = (g.dim >= 2) ? n : 1;
  const std::int64_t n2 = (g.dim >= 3) ? n : 1;
  std::size_t pos = 0;
  for (std::int64_t k0 = 0; k0 < n; ++k0) {
    for (std::int64_t k1 = 0; k1 < n1; ++k1) {
      for (std::int64_t k2 = 0; k2 < n2; ++k2) {
        const double s = ((k0 + k1 + k2) & 1) ? -scale : scale;
        buf[pos++] *= s;
      }
    }
  }
}

std::vector<std::complex<double>> to_complex(const GridFunction& f) {
  std::vector<std::complex<double>> buf(f.values.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = f.values[i];
  return buf;
}

GridFunction real_part(std::vector<std::complex<double>>&& buf, const Grid& g) {
  GridFunction out(g);
  for (std::size_t i = 0; i < buf.size(); ++i) out.values[i] = buf[i].real();
  return out;
}

} // namespace

Spectrum spectrum(const GridFunction& f) {
  Spectrum s;
  s.grid = f.grid;
  s.values = to_complex(f);
  fft::forward_nd(s.values, dims_of(f.grid), f.grid.dim);
  centering_phase(s.values, f.grid, std::pow(f.grid.h(), f.grid.dim));
  return s;
}

GridFunction inv_spectrum(const Spectrum& s) {
  std::vector<std::complex<double>> buf = s.values;
  centering_phase(buf, s.grid, 1.0 / std::pow(s.grid.h(), s.grid.dim));
  fft::inverse_nd(buf, dims_of(s.grid), s.grid.dim);
  return real_part(std::move(buf), s.grid);
}

GridFunction convolve(const GridFunction& f, const GridFunction& g) {
  if (!(f.grid == g.grid))
    throw ValidationError("convolve", "convolve requires functions on the same grid");
  auto a = to_complex(f);
  auto b = to_complex(g);
  const auto d = dims_of(f.grid);
  fft::forward_nd(a, d, f.grid.dim);
  fft::forward_nd(b, d, f.grid.dim);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  centering_phase(a, f.grid, std::pow(f.grid.h(), f.grid.dim));
  fft::inverse_nd(a, d, f.grid.dim);
  return real_part(std::move(a), f.grid);
}

std::vector<std::complex<double>> symbol_on_grid(const Grid& g, const SymbolFn& m) {
  std::vector<std::complex<double>> sym(static_cast<std::size_t>(g.size()));
  const std::int64_t n = g.n;
  const std::int64_t n1 = (g.dim >= 2) ? n : 1;
  const std::int64_t n2 = (g.dim >= 3) ? n : 1;
  std::array<double, 3> xi{0.0, 0.0, 0.0};
  std::size_t pos = 0;
  for (std::int64_t k0 = 0; k0 < n; ++k0) {
    xi[0] = g.freq(k0);
    for (std::int64_t k1 = 0; k1 < n1; ++k1) {
      xi[1] = (g.dim >= 2) ? g.freq(k1) : 0.0;
      for (std::int64_t k2 = 0; k2 < n2; ++k2) {
        xi[2] = (g.dim >= 3) ? g.freq(k2) : 0.0;
        sym[pos++] = m(xi);
      }
    }
  }
  return sym;
}

GridFunction apply_symbol_array(const GridFunction& f,
                                const std::vector<std::complex<double>>& sym) {
  auto buf = to_complex(f);
  const auto d = dims_of(f.grid);
  fft::forward_nd(buf, d, f.grid.dim);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= sym[i];
  fft::inverse_nd(buf, d, f.grid.dim);
  return real_part(std::move(buf), f.grid);
}

GridFunction apply_multiplier(const GridFunction& f, const SymbolFn& m) {
  return apply_symbol_array(f, symbol_on_grid(f.grid, m));
}

SymbolFn bessel_symbol(double s) {
  return [s](const std::array<double, 3>& xi) -> std::complex<double> {
    const double q = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    return std::pow(1.0 + 4.0 * M_PI * M_PI * q, 0.5 * s);
  };
}

double sobolev_norm(const GridFunction& f, double s, Lp p) {
  if (p != Lp::L2 && s != std::round(s))
    throw ValidationError("sobolev_norm.s",
                          "fractional Sobolev order requires the L2 norm");
  GridFunction g = (s == 0.0) ? f : apply_multiplier(f, bessel_symbol(s));
  switch (p) {
    case Lp::L1: return l1_norm(g);
    case Lp::L2: return l2_norm(g);
    case Lp::Linf: return linf_norm(g);
  }
  return 0.0;
}

double evaluate_at(const GridFunction& f, const std::array<double, 3>& x) {
  const Grid& g = f.grid;
  const std::int64_t n = g.n;
  std::array<std::int64_t, 3> i0{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int a = 0; a < g.dim; ++a) {
    const double u = (g.wrap(x[static_cast<std::size_t>(a)]) + g.L) / g.h();
    std::int64_t j = static_cast<std::int64_t>(std::floor(u));
    if (j >= n) j = n - 1;
    if (j < 0) j = 0;
    i0[static_cast<std::size_t>(a)] = j;
    frac[static_cast<std::size_t>(a)] = u - static_cast<double>(j);
  }
  const int corners = 1 << g.dim;
  double acc = 0.0;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::array<std::int64_t, 3> idx{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
      const int bit = (c >> a) & 1;
      const std::size_t ua = static_cast<std::size_t>(a);
      idx[ua] = (i0[ua] + bit) % n;
      w *= bit ? frac[ua] : (1.0 - frac[ua]);
    }
    acc += w * f.values[static_cast<std::size_t>(g.flat(idx))];
  }
  return acc;
}

GridFunction reflect(const GridFunction& f) {
  const Grid& g = f.grid;
  GridFunction out(g);
  const std::int64_t n = g.n;
  const std::int64_t n1 = (g.dim >= 2) ? n : 1;
  const std::int64_t n2 = (g.dim >= 3) ? n : 1;
  std::size_t pos = 0;
  for (std::int64_t j0 = 0; j0 < n; ++j0) {
    const std::int64_t r0 = (n - j0) % n;
    for (std::int64_t j1 = 0; j1 < n1; ++j1) {
      const std::int64_t r1 = (g.dim >= 2) ? (n - j1) % n : 0;
      for (std::int64_t j2 = 0; j2 < n2; ++j2) {
        const std::int64_t r2 = (g.dim >= 3) ? (n - j2) % n : 0;
        out.values[static_cast<std::size_t>(g.flat({r0, r1, r2}))] =
            f.values[pos++];
      }
    }
  }
  return out;
}

GridFunction spectral_derivative(const GridFunction& f, int axis) {
  if (axis < 0 || axis >= f.grid.dim)
    throw ValidationError("spectral_derivative.axis", "axis out of range");
  const Grid& g = f.grid;
  const std::int64_t nyq = g.n / 2;
  std::vector<std::complex<double>> sym(static_cast<std::size_t>(g.size()));
  const std::int64_t n = g.n;
  const std::int64_t n1 = (g.dim >= 2) ? n : 1;
  const std::int64_t n2 = (g.dim >= 3) ? n : 1;
  std::size_t pos = 0;
  for (std::int64_t k0 = 0; k0 < n; ++k0) {
    for (std::int64_t k1 = 0; k1 < n1; ++k1) {
      for (std::int64_t k2 = 0; k2 < n2; ++k2) {
        const std::int64_t ka = (axis == 0) ? k0 : (axis == 1 ? k1 : k2);
        if (ka == nyq) {
          sym[pos++] = 0.0;
        } else {
          sym[pos++] = std::complex<double>(0.0, kTwoPi * g.freq(ka));
        }
      }
    }
  }
  return apply_symbol_array(f, sym);
}

GridFunction marginal(const GridFunction& f, int keep_axis) {
  const Grid& g = f.grid;
  if (g.dim < 2) throw ValidationError("marginal", "marginal requires dim >= 2");
  if (keep_axis < 0 || keep_axis >= g.dim)
    throw ValidationError("marginal.axis", "axis out of range");
  Grid g1(1, g.L, g.n);
  GridFunction out(g1);
  const std::int64_t n = g.n;
  const double w = std::pow(g.h(), g.dim - 1);
  if (g.dim == 2) {
    for (std::int64_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::int64_t j = 0; j < n; ++j) {
        const std::int64_t fl = (keep_axis == 0) ? g.flat({i, j, 0}) : g.flat({j, i, 0});
        s += f.values[static_cast<std::size_t>(fl)];
      }
      out.values[static_cast<std::size_t>(i)] = w * s;
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::int64_t j = 0; j < n; ++j) {
        for (std::int64_t k = 0; k < n; ++k) {
          std::array<std::int64_t, 3> idx{0, 0, 0};
          idx[static_cast<std::size_t>(keep_axis)] = i;
          int slot = 0;
          for (int a = 0; a < 3; ++a) {
            if (a == keep_axis) continue;
            idx[static_cast<std::size_t>(a)] = (slot == 0) ? j : k;
            ++slot;
          }
          s += f.values[static_cast<std::size_t>(g.flat(idx))];
        }
      }
      out.values[static_cast<std::size_t>(i)] = w * s;
    }
  }
  return out;
}

GridFunction outer_product(const GridFunction& a, const GridFunction& b) {
  if (a.grid.dim != 1 || b.grid.dim != 1 || !(a.grid == b.grid))
    throw ValidationError("outer_product", "requires two 1D functions on the same grid");
  Grid g2(2, a.grid.L, a.grid.n);
  GridFunction out(g2);
  const std::int64_t n = g2.n;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      out.values[static_cast<std::size_t>(i * n + j)] =
          a.values[static_cast<std::size_t>(i)] * b.values[static_cast<std::size_t>(j)];
  return out;
}

GridFunction downsample(const GridFunction& fine, std::int64_t factor) {
  const Grid& gf = fine.grid;
  if (factor < 1 || gf.n % factor != 0)
    throw ValidationError("downsample", "factor must divide the fine grid n");
  Grid gc(gf.dim, gf.L, gf.n / factor);
  GridFunction out(gc);
  const std::int64_t nc = gc.n;
  if (gf.dim == 1) {
    for (std::int64_t i = 0; i < nc; ++i)
      out.values[static_cast<std::size_t>(i)] =
          fine.values[static_cast<std::size_t>(i * factor)];
  } else if (gf.dim == 2) {
    for (std::int64_t i = 0; i < nc; ++i)
      for (std::int64_t j = 0; j < nc; ++j)
        out.values[static_cast<std::size_t>(i * nc + j)] =
            fine.values[static_cast<std::size_t>(i * factor * gf.n + j * factor)];
  } else {
    for (std::int64_t i = 0; i < nc; ++i)
      for (std::int64_t j = 0; j < nc; ++j)
        for (std::int64_t k = 0; k < nc; ++k)
          out.values[static_cast<std::size_t>((i * nc + j) * nc + k)] =
              fine.values[static_cast<std::size_t>(
                  (i * factor * gf.n + j * factor) * gf.n + k * factor)];
  }
  out.is_density = fine.is_density;
  return out;
}

void validate_density(GridFunction& f, const std::string& what) {
  double mn = 0.0;
  for (double v : f.values) mn = std::min(mn, v);
  if (mn < -kTolNeg) {
    std::ostringstream os;
    os << what << ": density has negative value " << mn << " below -" << kTolNeg;
    throw NumericalError(what, os.str());
  }
  const double mass = quadrature(f);
  if (std::abs(mass - 1.0) > kTolMass) {
    std::ostringstream os;
    os << what << ": density mass " << mass << " deviates from 1 by more than " << kTolMass;
    throw NumericalError(what, os.str());
  }
  f.is_density = true;
}

std::int64_t renormalize_density(GridFunction& f) {
  std::int64_t clipped = 0;
  for (double& v : f.values) {
    if (v < 0.0) {
      v = 0.0;
      ++clipped;
    }
  }
  const double mass = quadrature(f);
  if (!(mass > 0.0))
    throw NumericalError("renormalize_density", "density has nonpositive total mass");
  const double inv = 1.0 / mass;
  for (double& v : f.values) v *= inv;
  f.is_density = true;
  return clipped;
}

} // namespace chaoslab

#include "chaoslab/kernels.hpp"

#include <cmath>
#include <sstream>

#include "chaoslab/errors.hpp"
#include "chaoslab/stats.hpp"

namespace chaoslab {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
thread_local int g_mollifier_warnings = 0;
} // namespace

int last_mollifier_warnings() { return g_mollifier_warnings; }

double lanczos_gamma(double z) {
  static const double c[9] = {0.99999999999980993,     676.5203681218851,
                              -1259.1392167224028,     771.32342877765313,
                              -176.61502916214059,     12.507343278686905,
                              -0.13857109526572012,    9.9843695780195716e-6,
                              1.5056327351493116e-7};
  if (z < 0.5) return kPi / (std::sin(kPi * z) * lanczos_gamma(1.0 - z));
  z -= 1.0;
  double x = c[0];
  for (int i = 1; i < 9; ++i) x += c[i] / (z + static_cast<double>(i));
  const double t = z + 7.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

namespace {

double c_alpha(double alpha) {
  return std::pow(kPi, -0.5 * alpha) * lanczos_gamma(0.5 * alpha);
}

// Normalization constant of the standard bump in dimension d, computed once
// by radial Simpson quadrature of c^-1 = Integral_{B_1} exp(-1/(1-|x|^2)).
double bump_constant(int d) {
  static double cache[4] = {0.0, 0.0, 0.0, 0.0};
  if (cache[d] != 0.0) return cache[d];
  const int m = 1 << 14; // Simpson panels over r in [0,1]
  const double dr = 1.0 / m;
  auto radial = [d](double r) {
    if (r >= 1.0) return 0.0;
    const double b = std::exp(-1.0 / (1.0 - r * r));
    switch (d) {
      case 1: return 2.0 * b;                    // two half-lines
      case 2: return 2.0 * kPi * r * b;          // circumference weight
      default: return 4.0 * kPi * r * r * b;     // sphere surface weight
    }
  };
  double integral = radial(0.0) + radial(1.0);
  for (int i = 1; i < m; ++i)
    integral += radial(i * dr) * ((i & 1) ? 4.0 : 2.0);
  integral *= dr / 3.0;
  cache[d] = 1.0 / integral;
  return cache[d];
}

std::int64_t next_pow2_at_least(double x) {
  std::int64_t n = 8;
  while (static_cast<double>(n) < x) n <<= 1;
  return n;
}

} // namespace

GridFunction make_mollifier(const MollifierSpec& spec, const Grid& g) {
  g_mollifier_warnings = 0;
  const double h = g.h();
  if (!(spec.eps > 0.0))
    throw ValidationError("mollifier.eps", "mollifier width eps must be positive");
  if (spec.base == MollifierBase::kBump && spec.eps < 4.0 * h) {
    const std::int64_t need = next_pow2_at_least(8.0 * g.L / spec.eps);
    std::ostringstream os;
    os << "bump mollifier needs eps >= 4h = " << 4.0 * h << " (eps = " << spec.eps
       << "); at L = " << g.L << " use n >= " << need;
    throw ValidationError("mollifier.eps", os.str());
  }
  if (spec.base == MollifierBase::kGaussian) {
    if (spec.eps < h) {
      std::ostringstream os;
      os << "gaussian mollifier needs eps >= h = " << h << " (eps = " << spec.eps << ")";
      throw ValidationError("mollifier.eps", os.str());
    }
    if (spec.eps < 2.0 * h) ++g_mollifier_warnings; // marginally resolved
  }

  const double eps = spec.eps;
  GridFunction J(g);
  if (spec.base == MollifierBase::kBump) {
    const double c = bump_constant(g.dim);
    const double scale = c / std::pow(eps, g.dim);
    J = make_grid_function(g, [eps, scale](const std::array<double, 3>& x) {
      const double r2 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (eps * eps);
      if (r2 >= 1.0) return 0.0;
      return scale * std::exp(-1.0 / (1.0 - r2));
    });
  } else {
    const double scale = std::pow(2.0 * kPi * eps * eps, -0.5 * g.dim);
    J = make_grid_function(g, [eps, scale](const std::array<double, 3>& x) {
      const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      return scale * std::exp(-0.5 * r2 / (eps * eps));
    });
  }
  const double mass = quadrature(J);
  if (!(mass > 0.0))
    throw NumericalError("mollifier", "mollifier mass vanished on this grid");
  for (double& v : J.values) v /= mass;
  J.is_density = true;
  return J;
}

GridFunction weierstrass_kernel(double eps, const Grid& g) {
  if (!(eps > 0.0))
    throw ValidationError("weierstrass.eps", "eps must be positive");
  const double scale = std::pow(4.0 * kPi * eps, -0.5 * g.dim);
  return make_grid_function(g, [eps, scale](const std::array<double, 3>& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    return scale * std::exp(-0.25 * r2 / eps);
  });
}

GridFunction make_cutoff(double eps, const Grid& g) {
  if (!(eps > 0.0)) throw ValidationError("cutoff.eps", "eps must be positive");
  return make_grid_function(g, [eps](const std::array<double, 3>& x) {
    const double r = eps * std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    const double t = r - 1.0;
    const double s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); // quintic smoothstep
    return 1.0 - s;
  });
}

std::vector<GridFunction> assemble_force(const KernelPair& pair) {
  GridFunction pot = convolve(pair.W, pair.V);
  std::vector<GridFunction> force;
  if (pair.mode == PairMode::kProduct) {
    for (double& v : pot.values) v *= pair.force_sign;
    force.push_back(std::move(pot));
  } else {
    for (int a = 0; a < pot.grid.dim; ++a) {
      GridFunction da = spectral_derivative(pot, a);
      for (double& v : da.values) v *= pair.force_sign;
      force.push_back(std::move(da));
    }
  }
  return force;
}

GridFunction pair_potential(const KernelPair& pair) { return convolve(pair.W, pair.V); }

GridFunction bounded_confidence_force(double R, const Grid& g) {
  if (g.dim != 1)
    throw ValidationError("bounded_confidence", "bounded-confidence family is 1D");
  if (!(R > 0.0) || R >= g.L)
    throw ValidationError("bounded_confidence.R", "need 0 < R < L");
  return make_grid_function(g, [R](const std::array<double, 3>& x) {
    if (std::abs(x[0]) > R) return 0.0;
    return (x[0] > 0.0) ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0);
  });
}

GridFunction bounded_confidence_potential(double R, const Grid& g) {
  if (g.dim != 1)
    throw ValidationError("bounded_confidence", "bounded-confidence family is 1D");
  return make_grid_function(g, [R](const std::array<double, 3>& x) {
    const double t = R - std::abs(x[0]);
    return (t > 0.0) ? -t : 0.0;
  });
}

KernelPair bounded_confidence_pair(double R, double eps, const Grid& g, BcRoute route) {
  if (g.dim != 1)
    throw ValidationError("bounded_confidence", "bounded-confidence family is 1D");
  if (!(R > 0.0) || R + 2.0 * eps >= g.L) {
    std::ostringstream os;
    os << "bounded-confidence support R + 2eps = " << R + 2.0 * eps
       << " must fit inside the half-box L = " << g.L;
    throw ValidationError("bounded_confidence.R", os.str());
  }
  GridFunction J = make_mollifier({MollifierBase::kBump, eps}, g);
  KernelPair pair;
  pair.eps = eps;
  if (route == BcRoute::kForce) {
    GridFunction kU = bounded_confidence_force(R, g);
    GridFunction W = convolve(kU, J);
    GridFunction zeta = make_cutoff(eps, g);
    for (std::size_t i = 0; i < W.values.size(); ++i) W.values[i] *= zeta.values[i];
    pair.W = std::move(W);
    pair.V = std::move(J);
    pair.mode = PairMode::kProduct;
    pair.force_sign = 1.0;
    pair.strongly_admissible = true; // ||W||_{H2} <= C eps^-2 <= C eps^-a_V
    pair.a_W = 0.0;
    pair.a_V = 2.5;
  } else {
    GridFunction ind = make_grid_function(g, [R](const std::array<double, 3>& x) {
      return (std::abs(x[0]) <= 0.5 * R) ? 1.0 : 0.0;
    });
    GridFunction Vf = convolve(ind, J);
    pair.V = Vf;
    pair.W = std::move(Vf);
    pair.mode = PairMode::kGradientProduct;
    // d/dx (V*V) is minus the bounded-confidence force; flip the sign so the
    // assembled force reproduces k_U (attraction under the -k drift).
    pair.force_sign = -1.0;
    pair.strongly_admissible = true;
    pair.a_W = 0.0;
    pair.a_V = 1.5;
  }
  return pair;
}

GridFunction coulomb_potential(const Grid& g) {
  if (g.dim < 2)
    throw ValidationError("coulomb", "Coulomb potential requires dim 2 or 3");
  const int M = 3; // image shells; converged to ~1e-5 rms at M = 3
  const double L = g.L;
  const double vol = std::pow(2.0 * L, g.dim);
  const std::int64_t n = g.n;
  GridFunction phi(g);

  if (g.dim == 3) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i0 = 0; i0 < n; ++i0) {
      const double x0 = g.node(i0);
      for (std::int64_t i1 = 0; i1 < n; ++i1) {
        const double x1 = g.node(i1);
        for (std::int64_t i2 = 0; i2 < n; ++i2) {
          const double x2 = g.node(i2);
          double acc = 0.0;
          for (int m0 = -M; m0 <= M; ++m0)
            for (int m1 = -M; m1 <= M; ++m1)
              for (int m2 = -M; m2 <= M; ++m2) {
                const double dx = x0 + 2.0 * L * m0;
                const double dy = x1 + 2.0 * L * m1;
                const double dz = x2 + 2.0 * L * m2;
                const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (r > 0.0) acc += 1.0 / (4.0 * kPi * r);
              }
          acc += (x0 * x0 + x1 * x1 + x2 * x2) / (6.0 * vol);
          phi.values[static_cast<std::size_t>((i0 * n + i1) * n + i2)] = acc;
        }
      }
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t i0 = 0; i0 < n; ++i0) {
      const double x0 = g.node(i0);
      for (std::int64_t i1 = 0; i1 < n; ++i1) {
        const double x1 = g.node(i1);
        double acc = 0.0;
        for (int m0 = -M; m0 <= M; ++m0)
          for (int m1 = -M; m1 <= M; ++m1) {
            const double dx = x0 + 2.0 * L * m0;
            const double dy = x1 + 2.0 * L * m1;
            const double r2 = dx * dx + dy * dy;
            if (r2 > 0.0) acc += -std::log(r2) / (4.0 * kPi); // -log(r)/(2 pi)
          }
        acc += (x0 * x0 + x1 * x1) / (4.0 * vol);
        phi.values[static_cast<std::size_t>(i0 * n + i1)] = acc;
      }
    }
  }

  // origin node: average of the 2*dim nearest neighbours
  std::array<std::int64_t, 3> c{n / 2, n / 2, n / 2};
  double avg = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    for (int s = -1; s <= 1; s += 2) {
      auto idx = c;
      idx[static_cast<std::size_t>(a)] =
          (c[static_cast<std::size_t>(a)] + s + n) % n;
      avg += phi.values[static_cast<std::size_t>(g.flat(idx))];
    }
  }
  phi.values[static_cast<std::size_t>(g.flat(c))] = avg / (2.0 * g.dim);

  const double mean = mean_value(phi);
  for (double& v : phi.values) v -= mean;
  return phi;
}

namespace {

// sqrt of a nonnegative real symbol; rejects negative values, naming the
// offending frequency.
std::vector<std::complex<double>> checked_sqrt_symbol(
    const std::vector<std::complex<double>>& sym, const Grid& g) {
  std::vector<std::complex<double>> out(sym.size());
  const std::int64_t n = g.n;
  const std::int64_t n1 = (g.dim >= 2) ? n : 1;
  const std::int64_t n2 = (g.dim >= 3) ? n : 1;
  std::size_t pos = 0;
  for (std::int64_t k0 = 0; k0 < n; ++k0)
    for (std::int64_t k1 = 0; k1 < n1; ++k1)
      for (std::int64_t k2 = 0; k2 < n2; ++k2) {
        const double re = sym[pos].real();
        if (re < 0.0) {
          std::ostringstream os;
          os << "square-root factorization needs a nonnegative transform; value "
             << re << " at frequency (" << g.freq(k0);
          if (g.dim >= 2) os << ", " << g.freq(k1);
          if (g.dim >= 3) os << ", " << g.freq(k2);
          os << ")";
          throw ValidationError("sqrt_symbol", os.str());
        }
        out[pos] = std::sqrt(re);
        ++pos;
      }
  return out;
}

GridFunction function_from_symbol(const Grid& g,
                                  const std::vector<std::complex<double>>& sym) {
  Spectrum s;
  s.grid = g;
  s.values = sym;
  return inv_spectrum(s);
}

std::vector<std::complex<double>> heat_symbol_values(const Grid& g, double eps) {
  return symbol_on_grid(g, [eps](const std::array<double, 3>& xi) {
    const double q = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    return std::complex<double>(std::exp(-4.0 * eps * kPi * kPi * q), 0.0);
  });
}

std::vector<std::complex<double>> inv_absxi_values(const Grid& g) {
  return symbol_on_grid(g, [](const std::array<double, 3>& xi) {
    const double q = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    return std::complex<double>(q > 0.0 ? 1.0 / q : 0.0, 0.0); // |xi| = 0 -> 0
  });
}

} // namespace

KernelPair coulomb_factorized_pair(int d, double eps, const Grid& g, CoulombRoute route) {
  if (d != 2 && d != 3)
    throw ValidationError("coulomb.d", "Coulomb family requires d = 2 or 3");
  if (g.dim != d)
    throw ValidationError("coulomb.grid", "grid dimension must match d");
  if (route != CoulombRoute::kMollifyBoth && d != 3)
    throw ValidationError("coulomb.route", "sqrt routes are defined for d = 3 only");

  KernelPair pair;
  pair.eps = eps;
  pair.mode = PairMode::kGradientProduct;
  pair.force_sign = -1.0; // force is -grad of the mollified potential

  if (route == CoulombRoute::kMollifyBoth) {
    GridFunction J = make_mollifier({MollifierBase::kBump, eps}, g);
    GridFunction phi = coulomb_potential(g);
    pair.W = convolve(J, phi);
    pair.V = std::move(J);
    pair.strongly_admissible = false;
    pair.a_W = 0.0;
    pair.a_V = 0.5 * d + 2.0;
    return pair;
  }

  // symmetric square-root factorizations (d = 3)
  const double lambda_b1 = 4.0 * kPi / 3.0; // Lebesgue measure of the unit ball
  const double c_const =
      std::sqrt(c_alpha(2.0) / (c_alpha(static_cast<double>(d - 2)) *
                                d * (d - 2) * lambda_b1));
  auto invxi = inv_absxi_values(g);

  if (route == CoulombRoute::kWeierstrassSqrt) {
    auto heat = heat_symbol_values(g, eps);
    auto half = checked_sqrt_symbol(heat, g); // exp(-2 eps pi^2 |xi|^2)
    for (std::size_t i = 0; i < half.size(); ++i)
      half[i] *= c_const * invxi[i].real();
    pair.V = function_from_symbol(g, half);
    pair.W = pair.V;
    pair.strongly_admissible = true;
    pair.a_W = 0.25;
    pair.a_V = 1.25;
  } else { // kFourierSqrt
    GridFunction J = make_mollifier({MollifierBase::kBump, eps}, g);
    Spectrum sj = spectrum(J);
    for (std::size_t i = 0; i < sj.values.size(); ++i)
      sj.values[i] *= c_const * invxi[i].real();
    pair.V = inv_spectrum(sj);
    pair.W = pair.V;
    pair.strongly_admissible = true;
    pair.a_W = 0.5;
    pair.a_V = 2.5;
  }
  return pair;
}

GridFunction bessel_potential(const Grid& g) {
  auto sym = symbol_on_grid(g, [](const std::array<double, 3>& xi) {
    const double q = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    return std::complex<double>(1.0 / (1.0 + 4.0 * kPi * kPi * q), 0.0);
  });
  return function_from_symbol(g, sym);
}

GridFunction bessel_potential_subordination(const Grid& g) {
  const int d = g.dim;
  const double pref = std::pow(4.0 * kPi, -0.5 * d);
  // log substitution t = exp(u); Simpson over u
  const double ulo = -40.0, uhi = 12.0;
  const int m = 4096;
  const double du = (uhi - ulo) / m;
  return make_grid_function(g, [&, d, pref](const std::array<double, 3>& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    if (d >= 2 && r2 == 0.0) return 0.0; // singular node, excluded from comparisons
    auto f = [&](double u) {
      const double t = std::exp(u);
      const double e = -t - 0.25 * r2 / t + u * (1.0 - 0.5 * d);
      return std::exp(e);
    };
    double s = f(ulo) + f(uhi);
    for (int i = 1; i < m; ++i) s += f(ulo + i * du) * ((i & 1) ? 4.0 : 2.0);
    return pref * s * du / 3.0;
  });
}

KernelPair bessel_pair(double eps, const Grid& g, BesselRoute route) {
  KernelPair pair;
  pair.eps = eps;
  pair.mode = PairMode::kGradientProduct;
  pair.force_sign = -1.0;
  const int d = g.dim;

  if (route == BesselRoute::kWeierstrass) {
    auto heat = heat_symbol_values(g, eps);
    auto half_heat = checked_sqrt_symbol(heat, g);
    auto bessel = symbol_on_grid(g, bessel_symbol(-2.0));
    auto half_bessel = checked_sqrt_symbol(bessel, g);
    for (std::size_t i = 0; i < half_heat.size(); ++i)
      half_heat[i] *= half_bessel[i].real();
    pair.V = function_from_symbol(g, half_heat);
    pair.W = pair.V;
    pair.strongly_admissible = true;
    const double aw[3] = {0.0, 0.1, 0.25};
    const double av[3] = {0.75, 1.0, 1.25};
    pair.a_W = aw[d - 1];
    pair.a_V = av[d - 1];
  } else {
    GridFunction J = make_mollifier({MollifierBase::kBump, eps}, g);
    pair.W = apply_multiplier(J, bessel_symbol(-2.0)); // G * J
    pair.V = std::move(J);
    pair.strongly_admissible = true;
    const double aw[3] = {0.0, 0.1, 0.1};
    pair.a_W = aw[d - 1];
    pair.a_V = 0.5 * d + 2.0;
  }
  return pair;
}

double factorization_residual(const KernelPair& pair, const GridFunction& oracle) {
  GridFunction prod = pair_potential(pair);
  const double mp = mean_value(prod);
  const double mo = mean_value(oracle);
  GridFunction diff(prod.grid);
  GridFunction cen(prod.grid);
  for (std::size_t i = 0; i < diff.values.size(); ++i) {
    const double o = oracle.values[i] - mo;
    diff.values[i] = (prod.values[i] - mp) - o;
    cen.values[i] = o;
  }
  const double denom = l2_norm(cen);
  if (!(denom > 0.0))
    throw ValidationError("factorization_residual", "oracle potential is constant");
  return l2_norm(diff) / denom;
}

ScalingFit certify_mollifier_scaling(MollifierBase base, const std::vector<double>& eps_list,
                                     const Grid& g, double m) {
  if (eps_list.size() < 2)
    throw ValidationError("certify_mollifier_scaling", "need at least two eps values");
  ScalingFit fit;
  for (double e : eps_list) {
    GridFunction J = make_mollifier({base, e}, g);
    fit.eps.push_back(e);
    fit.norms.push_back(sobolev_norm(J, m, Lp::L2));
  }
  OlsFit ols = ols_loglog(fit.eps, fit.norms);
  fit.slope = ols.slope;
  fit.intercept = ols.intercept;
  return fit;
}

AdmissibilityCert certify_admissible_pair(const std::function<KernelPair(double)>& factory,
                                          const std::vector<double>& eps_list) {
  if (eps_list.size() < 2)
    throw ValidationError("certify_admissible_pair", "need at least two eps values");
  AdmissibilityCert cert;
  std::vector<double> wl2, vh2, wh2;
  for (double e : eps_list) {
    KernelPair p = factory(e);
    AdmissibilityRow row;
    row.eps = e;
    row.w_l2 = l2_norm(p.W);
    row.v_h2 = sobolev_norm(p.V, 2.0, Lp::L2);
    row.w_h2 = sobolev_norm(p.W, 2.0, Lp::L2);
    cert.rows.push_back(row);
    wl2.push_back(row.w_l2);
    vh2.push_back(row.v_h2);
    wh2.push_back(row.w_h2);
    cert.declared_a_W = p.a_W;
    cert.declared_a_V = p.a_V;
    cert.strongly_admissible = p.strongly_admissible;
  }
  cert.fitted_a_W = -ols_loglog(eps_list, wl2).slope;
  cert.fitted_a_V = -ols_loglog(eps_list, vh2).slope;
  cert.fitted_a_W_h2 = -ols_loglog(eps_list, wh2).slope;
  return cert;
}

} // namespace chaoslab

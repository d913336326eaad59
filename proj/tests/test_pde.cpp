#include <doctest.h>

#include <cmath>
#include <vector>

#include "chaoslab/errors.hpp"
#include "chaoslab/grid.hpp"
#include "chaoslab/kernels.hpp"
#include "chaoslab/pde.hpp"

using namespace chaoslab;

namespace {

GridFunction gaussian_density(const Grid& g, double sd, double mean = 0.0) {
  GridFunction f = make_grid_function(g, [sd, mean](const std::array<double, 3>& x) {
    double q = 0.0;
    for (int a = 0; a < 3; ++a) q += (x[a] == 0.0 && a > 0) ? 0.0 : 0.0;
    q = (x[0] - mean) * (x[0] - mean);
    return std::exp(-0.5 * q / (sd * sd));
  });
  double mass = quadrature(f);
  for (double& v : f.values) v /= mass;
  f.is_density = true;
  return f;
}

GridFunction gaussian_density_2d(const Grid& g, double sd) {
  GridFunction f = make_grid_function(g, [sd](const std::array<double, 3>& x) {
    return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1]) / (sd * sd));
  });
  double mass = quadrature(f);
  for (double& v : f.values) v /= mass;
  f.is_density = true;
  return f;
}

GridFunction zero_kernel(const Grid& g) {
  return make_grid_function(g, [](const std::array<double, 3>&) { return 0.0; });
}

} // namespace

TEST_CASE("pure diffusion reproduces the heat kernel") {
  Grid g(1, 8.0, 512);
  const double sd0 = 0.5, sigma = 0.5, T = 0.5;
  PdeState st = make_pde_state(gaussian_density(g, sd0), sigma);
  GridFunction k = zero_kernel(g);
  const int steps = 64;
  for (int s = 0; s < steps; ++s) pde_step(st, k, T / steps);
  const double sdT = std::sqrt(sd0 * sd0 + sigma * sigma * T);
  GridFunction expect = gaussian_density(g, sdT);
  CHECK(l1_distance(st.rho, expect) < 1e-3);
  CHECK(st.t == doctest::Approx(T));
}

TEST_CASE("mass is conserved to machine precision over a thousand steps") {
  Grid g(1, 4.0, 256);
  PdeState st = make_pde_state(gaussian_density(g, 0.6), 0.4);
  GridFunction k = bounded_confidence_force(1.0, g);
  GridFunction keps = convolve(k, make_mollifier({MollifierBase::kBump, 0.125}, g));
  for (int s = 0; s < 1000; ++s) pde_step(st, keps, 0.0005);
  CHECK(std::abs(quadrature(st.rho) - 1.0) <= 1e-10);
  CHECK(st.rho.is_density);
}

TEST_CASE("aggregation pulls mass inward and keeps the density nonnegative") {
  Grid g(1, 4.0, 256);
  PdeState st = make_pde_state(gaussian_density(g, 1.0), 0.2);
  GridFunction keps = convolve(bounded_confidence_force(1.0, g),
                               make_mollifier({MollifierBase::kBump, 0.125}, g));
  GridFunction x2 = make_grid_function(
      g, [](const std::array<double, 3>& x) { return x[0] * x[0]; });
  GridFunction w0 = st.rho;
  for (std::size_t i = 0; i < w0.values.size(); ++i) w0.values[i] *= x2.values[i];
  const double var0 = quadrature(w0);
  for (int s = 0; s < 200; ++s) pde_step(st, keps, 0.001);
  GridFunction wT = st.rho;
  for (std::size_t i = 0; i < wT.values.size(); ++i) wT.values[i] *= x2.values[i];
  CHECK(quadrature(wT) < var0); // attractive interaction beats weak diffusion
  double mn = 0.0;
  for (double v : st.rho.values) mn = std::min(mn, v);
  CHECK(mn >= -kTolNeg);
}

TEST_CASE("transport CFL violation raises a numerical error naming the bound") {
  Grid g(1, 4.0, 256);
  PdeState st = make_pde_state(gaussian_density(g, 0.6), 0.4);
  GridFunction keps = convolve(bounded_confidence_force(1.0, g),
                               make_mollifier({MollifierBase::kBump, 0.125}, g));
  try {
    pde_step(st, keps, 1.0); // far above h/(2 max|u|)
    FAIL("expected a CFL error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("admissible dt") != std::string::npos);
  }
}

TEST_CASE("transport converges at better than first order under refinement") {
  // smooth everything: gaussian kernel, gaussian data
  auto solve = [](std::int64_t n) {
    Grid g(1, 4.0, n);
    PdeState st = make_pde_state(gaussian_density(g, 0.8), 0.3);
    GridFunction keps = convolve(bounded_confidence_force(1.0, g),
                                 make_mollifier({MollifierBase::kGaussian, 0.2}, g));
    const int steps = 512; // dt fixed across resolutions, well under CFL
    for (int s = 0; s < steps; ++s) pde_step(st, keps, 0.25 / steps);
    return st.rho;
  };
  GridFunction fine = solve(1024);
  GridFunction mid = solve(512);
  GridFunction coarse = solve(256);
  GridFunction ref_mid = downsample(fine, 2);
  GridFunction ref_coarse = downsample(fine, 4);
  const double err_mid = l1_distance(mid, ref_mid);
  const double err_coarse = l1_distance(coarse, ref_coarse);
  CHECK(err_coarse > 2.0 * err_mid); // ~4x for second order, >2x required
}

TEST_CASE("even initial data stays even under an odd kernel") {
  Grid g(1, 4.0, 256);
  PdeState st = make_pde_state(gaussian_density(g, 0.7), 0.3);
  GridFunction keps = convolve(bounded_confidence_force(1.0, g),
                               make_mollifier({MollifierBase::kBump, 0.125}, g));
  for (int s = 0; s < 100; ++s) pde_step(st, keps, 0.001);
  double defect = 0.0;
  for (std::int64_t i = 1; i < g.n; ++i)
    defect = std::max(defect,
                      std::abs(st.rho.values[static_cast<std::size_t>(i)] -
                               st.rho.values[static_cast<std::size_t>(g.n - i)]));
  CHECK(defect < 1e-12);
}

TEST_CASE("liouville with zero interaction preserves tensor structure") {
  Grid g(1, 6.0, 128);
  const double sd0 = 0.7, sigma = 0.5, T = 0.25;
  GridFunction rho0 = gaussian_density(g, sd0);
  GridFunction prod0 = outer_product(rho0, rho0);
  prod0.is_density = true;
  Liouville2State li = make_liouville2_state(prod0, sigma);
  GridFunction k = zero_kernel(g);
  const int steps = 32;
  for (int s = 0; s < steps; ++s) liouville2_step(li, k, T / steps);
  const double sdT = std::sqrt(sd0 * sd0 + sigma * sigma * T);
  GridFunction expect1 = gaussian_density(g, sdT);
  GridFunction expect = outer_product(expect1, expect1);
  CHECK(l1_distance(li.rho2, expect) < 1e-3);
}

TEST_CASE("liouville marginals track the mean-field solve at N = 2") {
  Grid g(1, 6.0, 128);
  const double sigma = 0.5, T = 0.125, eps = 0.375;
  GridFunction rho0 = gaussian_density(g, 0.7);
  GridFunction keps = convolve(bounded_confidence_force(1.0, g),
                               make_mollifier({MollifierBase::kBump, eps}, g));
  GridFunction prod0 = outer_product(rho0, rho0);
  prod0.is_density = true;
  Liouville2State li = make_liouville2_state(prod0, sigma);
  PdeState mf = make_pde_state(rho0, sigma);
  const int steps = 64;
  for (int s = 0; s < steps; ++s) {
    liouville2_step(li, keps, T / steps);
    pde_step(mf, keps, T / steps);
  }
  GridFunction marg = marginal(li.rho2, 0);
  // N = 2 marginal differs from mean field at O(1/N); the defect stays small
  // but genuinely nonzero at this horizon (~0.03)
  CHECK(l1_distance(marg, mf.rho) < 0.06);
  CHECK(l1_distance(marg, mf.rho) > 1e-4); // the comparison is not vacuous
  // exchange symmetry to roundoff
  double defect = 0.0;
  for (std::int64_t i = 0; i < g.n; ++i)
    for (std::int64_t j = 0; j < i; ++j)
      defect = std::max(
          defect, std::abs(li.rho2.values[static_cast<std::size_t>(i * g.n + j)] -
                           li.rho2.values[static_cast<std::size_t>(j * g.n + i)]));
  CHECK(defect < 1e-12);
}

TEST_CASE("relative entropy is zero on identical densities, positive otherwise") {
  Grid g(1, 4.0, 256);
  GridFunction p = gaussian_density(g, 0.5);
  GridFunction q = gaussian_density(g, 0.8);
  CHECK(relative_entropy(p, p) == doctest::Approx(0.0));
  CHECK(relative_entropy(p, q) > 0.0);
  CHECK(relative_entropy(q, p) > 0.0);
  // KL between N(0, s1^2) and N(0, s2^2): log(s2/s1) + s1^2/(2 s2^2) - 1/2
  const double s1 = 0.5, s2 = 0.8;
  const double expect = std::log(s2 / s1) + s1 * s1 / (2.0 * s2 * s2) - 0.5;
  CHECK(relative_entropy(p, q) == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("csiszar-kullback-pinsker holds on gaussian pairs") {
  Grid g(1, 4.0, 256);
  for (double s2 : {0.55, 0.7, 1.0, 1.3}) {
    GridFunction p = gaussian_density(g, 0.5);
    GridFunction q = gaussian_density(g, s2);
    const double l1 = l1_distance(p, q);
    CHECK(l1 * l1 <= 2.0 * relative_entropy(p, q) + 1e-8);
  }
}

TEST_CASE("entropy floor policy counts starved cells without blowing up") {
  Grid g(1, 4.0, 256);
  GridFunction p = gaussian_density(g, 0.5);
  GridFunction q = make_grid_function(g, [](const std::array<double, 3>& x) {
    return std::abs(x[0]) < 1.0 ? 1.0 : 0.0; // vanishes where p does not
  });
  double mass = quadrature(q);
  for (double& v : q.values) v /= mass;
  q.is_density = true;
  RelEntropyStats st;
  const double re = relative_entropy(p, q, &st);
  CHECK(std::isfinite(re));
  CHECK(st.floored_cells > 0);
  CHECK(st.floor_q > 0.0);
  // p below tolerance contributes nothing even where q is zero
  GridFunction tiny(g);
  tiny.values[0] = 1e-40;
  tiny.values[static_cast<std::size_t>(g.n / 2)] = 1.0 / g.h() - 1e-40;
  tiny.is_density = true;
  GridFunction point(g);
  point.values[static_cast<std::size_t>(g.n / 2)] = 1.0 / g.h();
  point.is_density = true;
  RelEntropyStats st2;
  CHECK(relative_entropy(tiny, point, &st2) == doctest::Approx(0.0));
  CHECK(st2.floored_cells == 0);
}

TEST_CASE("relative entropy validates its inputs") {
  Grid g(1, 4.0, 256);
  Grid g2(1, 4.0, 128);
  GridFunction p = gaussian_density(g, 0.5);
  GridFunction q = gaussian_density(g2, 0.5);
  CHECK_THROWS_AS(relative_entropy(p, q), ValidationError);
  GridFunction raw = make_grid_function(g, [](const std::array<double, 3>&) { return 1.0; });
  CHECK_THROWS_AS(relative_entropy(p, raw), ValidationError); // not density-flagged
}

TEST_CASE("l1 distance matches a hand integral") {
  Grid g(1, 2.0, 64);
  GridFunction a = make_grid_function(g, [](const std::array<double, 3>&) { return 0.25; });
  GridFunction b = make_grid_function(g, [](const std::array<double, 3>& x) {
    return x[0] >= 0.0 ? 0.25 + 0.1 : 0.25 - 0.1;
  });
  CHECK(l1_distance(a, b) == doctest::Approx(0.1 * 4.0).epsilon(1e-12));
}

TEST_CASE("deregularization residual equals its quadrature definition") {
  Grid g(1, 4.0, 256);
  GridFunction rho = gaussian_density(g, 0.6);
  GridFunction k = bounded_confidence_force(1.0, g);
  GridFunction keps = convolve(k, make_mollifier({MollifierBase::kBump, 0.25}, g));
  const double fast = deregularization_residual(k, keps, rho);
  // direct O(n^2) reference: Integral (k-keps)^2(x) (rho star rho~)(x) dx
  const std::int64_t n = g.n;
  const double h = g.h();
  double slow = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double corr = 0.0; // (rho conv rho~)(x_i) = sum_j rho(x_j) rho(x_j - x_i)
    for (std::int64_t j = 0; j < n; ++j) {
      // coordinate x_j - x_i = (j - i) h lives at node index j - i + n/2
      const std::int64_t jm = ((j - i + n / 2) % n + n) % n;
      corr += rho.values[static_cast<std::size_t>(j)] *
              rho.values[static_cast<std::size_t>(jm)];
    }
    corr *= h;
    const double d = k.values[static_cast<std::size_t>(i)] -
                     keps.values[static_cast<std::size_t>(i)];
    slow += d * d * corr;
  }
  slow *= h;
  CHECK(fast == doctest::Approx(slow).epsilon(1e-10));
  // and it shrinks as eps does
  GridFunction keps2 = convolve(k, make_mollifier({MollifierBase::kBump, 0.125}, g));
  CHECK(deregularization_residual(k, keps2, rho) < fast);
}

#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <string>

#include "chaoslab/errors.hpp"
#include "chaoslab/grid.hpp"
#include "chaoslab/gridfn_io.hpp"

using namespace chaoslab;

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

GridFunction gaussian_density(const Grid& g, double sd) {
  GridFunction f = make_grid_function(g, [sd](const std::array<double, 3>& x) {
    double q = 0.0;
    for (double c : x) q += c * c;
    return std::exp(-0.5 * q / (sd * sd));
  });
  double mass = quadrature(f);
  for (double& v : f.values) v /= mass;
  f.is_density = true;
  return f;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("grid constructor validates its arguments") {
  CHECK_THROWS_AS(Grid(1, 1.0, 12), ValidationError);  // not a power of two
  CHECK_THROWS_AS(Grid(1, 1.0, 4), ValidationError);   // too small
  CHECK_THROWS_AS(Grid(0, 1.0, 64), ValidationError);  // bad dim
  CHECK_THROWS_AS(Grid(4, 1.0, 64), ValidationError);
  CHECK_THROWS_AS(Grid(1, -2.0, 64), ValidationError); // bad L
  CHECK_NOTHROW(Grid(3, 2.0, 8));
}

TEST_CASE("node placement and wrap") {
  Grid g(1, 2.0, 8);
  CHECK(g.h() == doctest::Approx(0.5));
  CHECK(g.node(0) == doctest::Approx(-2.0));
  CHECK(g.node(4) == doctest::Approx(0.0)); // origin at index n/2
  CHECK(g.wrap(2.0) == doctest::Approx(-2.0));
  CHECK(g.wrap(-2.5) == doctest::Approx(1.5));
  CHECK(g.wrap(5.0) == doctest::Approx(1.0));
}

TEST_CASE("frequency layout maps Nyquist to the positive frequency") {
  Grid g(1, 2.0, 8); // frequencies k/(2L) = k/4
  CHECK(g.freq(0) == doctest::Approx(0.0));
  CHECK(g.freq(1) == doctest::Approx(0.25));
  CHECK(g.freq(4) == doctest::Approx(1.0));  // Nyquist, positive
  CHECK(g.freq(5) == doctest::Approx(-0.75));
  CHECK(g.freq(7) == doctest::Approx(-0.25));
}

TEST_CASE("quadrature of a constant is the domain volume") {
  Grid g(2, 1.5, 16);
  GridFunction one = make_grid_function(g, [](const std::array<double, 3>&) { return 1.0; });
  CHECK(quadrature(one) == doctest::Approx(9.0).epsilon(1e-14)); // (2L)^2
}

TEST_CASE("spectrum at frequency zero equals the integral") {
  Grid g(1, 3.0, 64);
  GridFunction f = gaussian_density(g, 0.7);
  Spectrum s = spectrum(f);
  CHECK(s.values[0].real() == doctest::Approx(quadrature(f)).epsilon(1e-12));
  CHECK(s.values[0].imag() == doctest::Approx(0.0));
}

TEST_CASE("spectrum of a centered cosine matches the analytic transform") {
  // u(x) = cos(2 pi m x / (2L)) has FT mass (2L)/2 at xi = +-m/(2L).
  Grid g(1, 2.0, 32);
  const double xi1 = 1.0 / 4.0;
  GridFunction u = make_grid_function(g, [xi1](const std::array<double, 3>& x) {
    return std::cos(2.0 * kPi * xi1 * x[0]);
  });
  Spectrum s = spectrum(u);
  for (std::int64_t k = 0; k < g.n; ++k) {
    const std::complex<double> expect =
        (k == 1 || k == g.n - 1) ? std::complex<double>(2.0, 0.0)
                                 : std::complex<double>(0.0, 0.0);
    CHECK(std::abs(s.values[static_cast<std::size_t>(k)] - expect) < 1e-12);
  }
}

TEST_CASE("spectrum / inv_spectrum roundtrip is exact to roundoff") {
  Grid g(2, 1.0, 16);
  GridFunction f = gaussian_density(g, 0.4);
  GridFunction back = inv_spectrum(spectrum(f));
  for (std::size_t i = 0; i < f.values.size(); ++i)
    CHECK(back.values[i] == doctest::Approx(f.values[i]).epsilon(1e-12));
}

TEST_CASE("convolution with a grid delta is the identity") {
  Grid g(1, 2.0, 64);
  GridFunction f = gaussian_density(g, 0.5);
  GridFunction delta(g);
  delta.values[static_cast<std::size_t>(g.n / 2)] = 1.0 / g.h(); // unit mass at x=0
  GridFunction conv = convolve(delta, f);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    CHECK(conv.values[i] == doctest::Approx(f.values[i]).epsilon(1e-10));
}

TEST_CASE("convolution with a shifted delta translates") {
  Grid g(1, 2.0, 64);
  GridFunction f = gaussian_density(g, 0.5);
  const std::int64_t shift = 9;
  GridFunction delta(g);
  delta.values[static_cast<std::size_t>(g.n / 2 + shift)] = 1.0 / g.h();
  GridFunction conv = convolve(delta, f);
  for (std::int64_t i = 0; i < g.n; ++i) {
    const std::int64_t src = (i - shift + g.n) % g.n;
    CHECK(conv.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(f.values[static_cast<std::size_t>(src)]).epsilon(1e-10));
  }
}

TEST_CASE("convolution of two gaussians adds variances") {
  Grid g(1, 8.0, 512);
  GridFunction a = gaussian_density(g, 0.5);
  GridFunction b = gaussian_density(g, 1.2);
  GridFunction c = convolve(a, b);
  const double sd = std::sqrt(0.5 * 0.5 + 1.2 * 1.2);
  GridFunction expect = gaussian_density(g, sd);
  double err = 0.0;
  for (std::size_t i = 0; i < c.values.size(); ++i)
    err = std::max(err, std::abs(c.values[i] - expect.values[i]));
  CHECK(err < 1e-7); // grid renormalization shifts each factor by ~1e-9
}

TEST_CASE("Plancherel: quadrature of f^2 equals spectral energy") {
  Grid g(1, 2.0, 128);
  GridFunction f = gaussian_density(g, 0.6);
  GridFunction f2 = f;
  for (double& v : f2.values) v *= v;
  Spectrum s = spectrum(f);
  double energy = 0.0;
  for (const auto& c : s.values) energy += std::norm(c);
  energy /= 2.0 * g.L;
  CHECK(quadrature(f2) == doctest::Approx(energy).epsilon(1e-12));
}

TEST_CASE("apply_multiplier with symbol one is the identity") {
  Grid g(1, 1.0, 32);
  GridFunction f = gaussian_density(g, 0.3);
  GridFunction out = apply_multiplier(
      f, [](const std::array<double, 3>&) { return std::complex<double>(1.0, 0.0); });
  for (std::size_t i = 0; i < f.values.size(); ++i)
    CHECK(out.values[i] == doctest::Approx(f.values[i]).epsilon(1e-12));
}

TEST_CASE("apply_multiplier with a phase translates by a grid offset") {
  Grid g(1, 2.0, 64);
  GridFunction f = gaussian_density(g, 0.5);
  const double a = 4.0 * g.h();
  GridFunction out = apply_multiplier(f, [a](const std::array<double, 3>& xi) {
    const double ph = -2.0 * kPi * xi[0] * a;
    return std::complex<double>(std::cos(ph), std::sin(ph));
  });
  for (std::int64_t i = 0; i < g.n; ++i) {
    const std::int64_t src = (i - 4 + g.n) % g.n;
    CHECK(out.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(f.values[static_cast<std::size_t>(src)]).epsilon(1e-9));
  }
}

TEST_CASE("multiplier composition: heat semigroup property") {
  Grid g(1, 2.0, 64);
  GridFunction f = gaussian_density(g, 0.4);
  auto heat = [](double tau) {
    return [tau](const std::array<double, 3>& xi) {
      return std::complex<double>(std::exp(-tau * xi[0] * xi[0]), 0.0);
    };
  };
  GridFunction twice = apply_multiplier(apply_multiplier(f, heat(0.3)), heat(0.7));
  GridFunction once = apply_multiplier(f, heat(1.0));
  for (std::size_t i = 0; i < f.values.size(); ++i)
    CHECK(twice.values[i] == doctest::Approx(once.values[i]).epsilon(1e-12));
}

TEST_CASE("spectral derivative of a sine is the cosine") {
  Grid g(1, 1.0, 64);
  GridFunction f = make_grid_function(
      g, [](const std::array<double, 3>& x) { return std::sin(kPi * x[0]); });
  GridFunction df = spectral_derivative(f, 0);
  for (std::int64_t i = 0; i < g.n; ++i)
    CHECK(df.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(kPi * std::cos(kPi * g.node(i))).epsilon(1e-10));
}

TEST_CASE("evaluate_at reproduces node values and interpolates midpoints") {
  Grid g(1, 2.0, 16);
  GridFunction f = make_grid_function(
      g, [](const std::array<double, 3>& x) { return x[0] * x[0]; });
  CHECK(evaluate_at(f, {g.node(3), 0, 0}) == doctest::Approx(f.values[3]));
  const double mid = 0.5 * (g.node(5) + g.node(6));
  CHECK(evaluate_at(f, {mid, 0, 0}) ==
        doctest::Approx(0.5 * (f.values[5] + f.values[6])));
  // periodic wrap: just left of -L interpolates toward the last node
  CHECK(evaluate_at(f, {2.0, 0, 0}) == doctest::Approx(f.values[0]));
}

TEST_CASE("reflect flips around the origin node") {
  Grid g(1, 2.0, 16);
  GridFunction f = make_grid_function(
      g, [](const std::array<double, 3>& x) { return x[0] + 0.25 * x[0] * x[0]; });
  GridFunction r = reflect(f);
  for (std::int64_t i = 0; i < g.n; ++i) {
    const double x = g.node(i);
    const double mx = g.wrap(-x);
    CHECK(r.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(evaluate_at(f, {mx, 0, 0})).epsilon(1e-12));
  }
}

TEST_CASE("sobolev norm at s=0 coincides with the L2 norm") {
  Grid g(1, 2.0, 128);
  GridFunction f = gaussian_density(g, 0.5);
  CHECK(sobolev_norm(f, 0.0, Lp::L2) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
}

TEST_CASE("H1 norm of a single mode matches its closed form") {
  // u = cos(2 pi xi1 x): ||u||_L2^2 = (2L)/2, ||u'||_L2^2 = (2 pi xi1)^2 (2L)/2.
  Grid g(1, 2.0, 64);
  const double xi1 = 0.5; // mode k=2
  GridFunction u = make_grid_function(g, [xi1](const std::array<double, 3>& x) {
    return std::cos(2.0 * kPi * xi1 * x[0]);
  });
  const double l2sq = 2.0;
  const double expect = std::sqrt(l2sq * (1.0 + std::pow(2.0 * kPi * xi1, 2)));
  CHECK(sobolev_norm(u, 1.0, Lp::L2) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("marginal of an outer product recovers the factor") {
  Grid g(1, 2.0, 32);
  GridFunction a = gaussian_density(g, 0.5);
  GridFunction b = gaussian_density(g, 0.9);
  GridFunction prod = outer_product(a, b);
  CHECK(prod.grid.dim == 2);
  GridFunction m0 = marginal(prod, 0);
  GridFunction m1 = marginal(prod, 1);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    CHECK(m0.values[i] == doctest::Approx(a.values[i]).epsilon(1e-12));
    CHECK(m1.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("downsample keeps aligned nodes") {
  Grid fine(1, 2.0, 64);
  GridFunction f = make_grid_function(
      fine, [](const std::array<double, 3>& x) { return std::exp(x[0]); });
  GridFunction c = downsample(f, 4);
  CHECK(c.grid.n == 16);
  for (std::int64_t i = 0; i < c.grid.n; ++i)
    CHECK(c.values[static_cast<std::size_t>(i)] ==
          f.values[static_cast<std::size_t>(4 * i)]);
}

TEST_CASE("validate_density enforces mass and positivity") {
  Grid g(1, 1.0, 32);
  GridFunction f = gaussian_density(g, 0.3);
  CHECK_NOTHROW(validate_density(f, "test"));

  GridFunction bad_mass = f;
  for (double& v : bad_mass.values) v *= 1.5;
  CHECK_THROWS_AS(validate_density(bad_mass, "test"), NumericalError);

  GridFunction bad_neg = f;
  bad_neg.values[0] = -1e-6;
  CHECK_THROWS_AS(validate_density(bad_neg, "test"), NumericalError);
}

TEST_CASE("renormalize_density clips tiny negatives and restores unit mass") {
  Grid g(1, 1.0, 32);
  GridFunction f = gaussian_density(g, 0.3);
  f.values[0] = -1e-14; // below roundoff, above -kTolNeg
  for (double& v : f.values) v *= 1.0 + 3e-9;
  const std::int64_t clipped = renormalize_density(f);
  CHECK(clipped == 1);
  CHECK(quadrature(f) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.is_density);
}

TEST_CASE("csv round trip is bit exact") {
  Grid g(1, 2.0, 32);
  GridFunction f = gaussian_density(g, 0.777);
  const std::string path = temp_path("chaoslab_io_test.csv");
  save_csv(f, path);
  GridFunction back = load_csv(path);
  REQUIRE(back.grid == f.grid);
  for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(back.values[i] == f.values[i]);
  std::remove(path.c_str());
}

TEST_CASE("binary round trip is bit exact in 2d") {
  Grid g(2, 1.5, 16);
  GridFunction f = gaussian_density(g, 0.4);
  const std::string path = temp_path("chaoslab_io_test.bin");
  save_binary(f, path);
  GridFunction back = load_binary(path);
  REQUIRE(back.grid == f.grid);
  for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(back.values[i] == f.values[i]);
  std::remove(path.c_str());
}

TEST_CASE("load_csv of a missing file raises an io error") {
  CHECK_THROWS_AS(load_csv("/nonexistent/missing.csv"), IoError);
  CHECK_THROWS_AS(load_binary("/nonexistent/missing.bin"), IoError);
}

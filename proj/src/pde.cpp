#include "chaoslab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "chaoslab/errors.hpp"
#include "chaoslab/reduce.hpp"

namespace chaoslab {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

double vanleer(double a, double b) {
  const double p = a * b;
  return p > 0.0 ? 2.0 * p / (a + b) : 0.0;
}

// Exact heat semigroup over time tau: multiply the spectrum by
// exp(-(sigma^2/2) 4 pi^2 |xi|^2 tau).
void diffuse(GridFunction& rho, double sigma, double tau) {
  const double c = 2.0 * kPi * kPi * sigma * sigma * tau;
  rho = apply_multiplier(rho, [c](const std::array<double, 3>& xi) {
    const double q = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    return std::complex<double>(std::exp(-c * q), 0.0);
  });
}

void cfl_check(double dt, double h, double umax, const char* where) {
  const double denom = 2.0 * umax;
  if (denom <= 0.0) return;
  const double admissible = h / denom;
  if (dt > admissible * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << where << ": transport CFL violated, dt = " << dt
       << " exceeds admissible dt = " << admissible;
    throw NumericalError("pde.dt", os.str());
  }
}

// Conservative van Leer MUSCL flux divergence in 1D: returns -d/dx(rho u)
// for cell-centered rho and u, periodic.
void transport_rhs_1d(const std::vector<double>& rho, const std::vector<double>& u,
                      double h, std::vector<double>& out, std::vector<double>& flux,
                      bool parallel) {
  const auto n = static_cast<std::int64_t>(rho.size());
  auto at = [n](std::int64_t j) { return static_cast<std::size_t>((j + n) % n); };
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t j = 0; j < n; ++j) {
    // face j+1/2
    const double uf = 0.5 * (u[at(j)] + u[at(j + 1)]);
    const double sl = vanleer(rho[at(j)] - rho[at(j - 1)], rho[at(j + 1)] - rho[at(j)]);
    const double sr =
        vanleer(rho[at(j + 1)] - rho[at(j)], rho[at(j + 2)] - rho[at(j + 1)]);
    const double left = rho[at(j)] + 0.5 * sl;
    const double right = rho[at(j + 1)] - 0.5 * sr;
    flux[static_cast<std::size_t>(j)] =
        std::max(uf, 0.0) * left + std::min(uf, 0.0) * right;
  }
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t j = 0; j < n; ++j)
    out[static_cast<std::size_t>(j)] =
        -(flux[static_cast<std::size_t>(j)] - flux[at(j - 1)]) / h;
}

void clip_and_renormalize(GridFunction& rho, std::int64_t& clipped, double& renorm) {
  for (double& v : rho.values) {
    if (v < 0.0) {
      if (v < -kTolNeg) ++clipped;
      v = 0.0;
    }
  }
  rho.is_density = true;
  const double mass = quadrature(rho);
  if (!(mass > 0.0))
    throw NumericalError("pde.mass", "density lost all mass during a step");
  renorm += std::abs(mass - 1.0);
  const double inv = 1.0 / mass;
  for (double& v : rho.values) v *= inv;
}

} // namespace

PdeState make_pde_state(GridFunction rho0, double sigma) {
  if (rho0.grid.dim != 1)
    throw ValidationError("pde.rho0", "mean-field PDE state must be 1D");
  if (!(sigma > 0.0)) throw ValidationError("pde.sigma", "sigma must be > 0");
  validate_density(rho0, "pde.rho0");
  PdeState s;
  s.rho = std::move(rho0);
  s.rho.is_density = true;
  s.sigma = sigma;
  return s;
}

Liouville2State make_liouville2_state(GridFunction rho2_0, double sigma) {
  if (rho2_0.grid.dim != 2)
    throw ValidationError("pde.rho2", "Liouville state must be 2D");
  if (!(sigma > 0.0)) throw ValidationError("pde.sigma", "sigma must be > 0");
  validate_density(rho2_0, "pde.rho2");
  Liouville2State s;
  s.rho2 = std::move(rho2_0);
  s.rho2.is_density = true;
  s.sigma = sigma;
  return s;
}

void pde_step(PdeState& state, const GridFunction& k_eps, double dt, bool parallel) {
  if (!(state.rho.grid == k_eps.grid))
    throw ValidationError("pde.grid", "kernel and density must share a grid");
  if (!(dt > 0.0)) throw ValidationError("pde.dt", "dt must be > 0");
  const double h = state.rho.grid.h();

  diffuse(state.rho, state.sigma, 0.5 * dt);

  // SSP-RK2 on the transport part, velocity u = -(k_eps * rho) per stage.
  const auto n = static_cast<std::size_t>(state.rho.grid.n);
  std::vector<double> rhs(n), flux(n);

  GridFunction vel = convolve(k_eps, state.rho);
  for (double& v : vel.values) v = -v;
  cfl_check(dt, h, linf_norm(vel), "pde_step");

  GridFunction stage1 = state.rho;
  transport_rhs_1d(state.rho.values, vel.values, h, rhs, flux, parallel);
  for (std::size_t j = 0; j < n; ++j) stage1.values[j] += dt * rhs[j];

  GridFunction vel1 = convolve(k_eps, stage1);
  for (double& v : vel1.values) v = -v;
  transport_rhs_1d(stage1.values, vel1.values, h, rhs, flux, parallel);
  for (std::size_t j = 0; j < n; ++j)
    state.rho.values[j] = 0.5 * state.rho.values[j] + 0.5 * (stage1.values[j] + dt * rhs[j]);

  diffuse(state.rho, state.sigma, 0.5 * dt);

  clip_and_renormalize(state.rho, state.clipped_cells, state.renorm_total);
  state.t += dt;
}

namespace {

// Unsplit 2D flux divergence with static cell velocities (u1, u2). The two
// axis contributions use identical stencils, so the operator commutes with
// the (x1, x2) exchange when the data and velocities do.
void transport_rhs_2d(const std::vector<double>& rho, const std::vector<double>& u1,
                      const std::vector<double>& u2, std::int64_t n, double h,
                      std::vector<double>& out, bool parallel) {
  auto id = [n](std::int64_t i, std::int64_t j) {
    return static_cast<std::size_t>(((i + n) % n) * n + ((j + n) % n));
  };
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      double div = 0.0;
      // axis 0 faces (i-1/2 and i+1/2)
      for (int f = 0; f < 2; ++f) {
        const std::int64_t b = i - 1 + f; // face between rows b and b+1
        const double uf = 0.5 * (u1[id(b, j)] + u1[id(b + 1, j)]);
        const double sl =
            vanleer(rho[id(b, j)] - rho[id(b - 1, j)], rho[id(b + 1, j)] - rho[id(b, j)]);
        const double sr = vanleer(rho[id(b + 1, j)] - rho[id(b, j)],
                                  rho[id(b + 2, j)] - rho[id(b + 1, j)]);
        const double fl = std::max(uf, 0.0) * (rho[id(b, j)] + 0.5 * sl) +
                          std::min(uf, 0.0) * (rho[id(b + 1, j)] - 0.5 * sr);
        div += (f == 0 ? -fl : fl);
      }
      // axis 1 faces (j-1/2 and j+1/2)
      for (int f = 0; f < 2; ++f) {
        const std::int64_t b = j - 1 + f;
        const double uf = 0.5 * (u2[id(i, b)] + u2[id(i, b + 1)]);
        const double sl =
            vanleer(rho[id(i, b)] - rho[id(i, b - 1)], rho[id(i, b + 1)] - rho[id(i, b)]);
        const double sr = vanleer(rho[id(i, b + 1)] - rho[id(i, b)],
                                  rho[id(i, b + 2)] - rho[id(i, b + 1)]);
        const double fl = std::max(uf, 0.0) * (rho[id(i, b)] + 0.5 * sl) +
                          std::min(uf, 0.0) * (rho[id(i, b + 1)] - 0.5 * sr);
        div += (f == 0 ? -fl : fl);
      }
      out[id(i, j)] = -div / h;
    }
  }
}

} // namespace

void liouville2_step(Liouville2State& state, const GridFunction& k_eps, double dt,
                     bool parallel) {
  const Grid& g2 = state.rho2.grid;
  if (k_eps.grid.dim != 1 || k_eps.grid.n != g2.n || k_eps.grid.L != g2.L)
    throw ValidationError("pde.grid", "Liouville kernel must be 1D on matching axes");
  if (!(dt > 0.0)) throw ValidationError("pde.dt", "dt must be > 0");
  const std::int64_t n = g2.n;
  const double h = g2.h();

  diffuse(state.rho2, state.sigma, 0.5 * dt);

  // Static drift b_i = (1/2) k_eps(x_i - x_j); transport velocity is -b.
  // x_i - x_j lands exactly on grid nodes, no interpolation needed.
  const auto total = static_cast<std::size_t>(n * n);
  std::vector<double> u1(total), u2(total);
  double umax1 = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j) {
      const std::int64_t d = ((i - j + n) % n + n / 2) % n; // node index of x_i - x_j
      const double v = -0.5 * k_eps.values[static_cast<std::size_t>(d)];
      u1[static_cast<std::size_t>(i * n + j)] = v;
      u2[static_cast<std::size_t>(j * n + i)] = v; // u2(x1,x2) = u1(x2,x1)
      umax1 = std::max(umax1, std::abs(v));
    }
  cfl_check(dt, h, 2.0 * umax1, "liouville2_step"); // both axes advect

  std::vector<double> rhs(total);
  GridFunction stage1 = state.rho2;
  transport_rhs_2d(state.rho2.values, u1, u2, n, h, rhs, parallel);
  for (std::size_t a = 0; a < total; ++a) stage1.values[a] += dt * rhs[a];
  transport_rhs_2d(stage1.values, u1, u2, n, h, rhs, parallel);
  for (std::size_t a = 0; a < total; ++a)
    state.rho2.values[a] = 0.5 * state.rho2.values[a] + 0.5 * (stage1.values[a] + dt * rhs[a]);

  diffuse(state.rho2, state.sigma, 0.5 * dt);

  clip_and_renormalize(state.rho2, state.clipped_cells, state.renorm_total);
  state.t += dt;
}

double relative_entropy(const GridFunction& p, const GridFunction& q,
                        RelEntropyStats* stats) {
  if (!(p.grid == q.grid))
    throw ValidationError("pde.relative_entropy", "densities must share a grid");
  if (!p.is_density || !q.is_density)
    throw ValidationError("pde.relative_entropy", "both inputs must be density-flagged");
  const double qmax = linf_norm(q);
  const double floor_q = 1e-30 * qmax;
  std::int64_t floored = 0;
  std::vector<double> contrib(p.values.size(), 0.0);
  for (std::size_t a = 0; a < p.values.size(); ++a) {
    const double pv = p.values[a];
    if (pv <= kTolNeg) continue; // 0 log 0 = 0 convention
    double qv = q.values[a];
    if (qv <= floor_q) {
      qv = floor_q;
      ++floored;
    }
    contrib[a] = pv * std::log(pv / qv);
  }
  if (stats) {
    stats->floored_cells = floored;
    stats->floor_q = floor_q;
  }
  double hpow = 1.0;
  for (int a = 0; a < p.grid.dim; ++a) hpow *= p.grid.h();
  return hpow * blocked_sum(contrib.data(), contrib.size());
}

double l1_distance(const GridFunction& p, const GridFunction& q) {
  if (!(p.grid == q.grid))
    throw ValidationError("pde.l1_distance", "densities must share a grid");
  std::vector<double> diff(p.values.size());
  for (std::size_t a = 0; a < diff.size(); ++a)
    diff[a] = std::abs(p.values[a] - q.values[a]);
  double hpow = 1.0;
  for (int a = 0; a < p.grid.dim; ++a) hpow *= p.grid.h();
  return hpow * blocked_sum(diff.data(), diff.size());
}

double deregularization_residual(const GridFunction& k, const GridFunction& k_eps,
                                 const GridFunction& rho) {
  if (k.grid.dim != 1)
    throw ValidationError("pde.dereg", "residual is defined on 1D grids");
  if (!(k.grid == k_eps.grid) || !(k.grid == rho.grid))
    throw ValidationError("pde.dereg", "all inputs must share a grid");
  GridFunction corr = convolve(rho, reflect(rho)); // rho ster rho~
  GridFunction prod(k.grid);
  for (std::size_t a = 0; a < prod.values.size(); ++a) {
    const double d = k.values[a] - k_eps.values[a];
    prod.values[a] = d * d * corr.values[a];
  }
  return quadrature(prod);
}

} // namespace chaoslab

#include "chaoslab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chaoslab/errors.hpp"
#include "chaoslab/rng.hpp"

namespace chaoslab {

namespace {

// Fast periodic linear interpolation on a 1D grid (hot path of the O(N^2)
// pairwise sum); agrees with evaluate_at on 1D grids.
struct Interp1 {
  const double* v;
  std::int64_t n;
  double L;
  double inv_h;

  explicit Interp1(const GridFunction& f)
      : v(f.values.data()), n(f.grid.n), L(f.grid.L),
        inv_h(static_cast<double>(f.grid.n) / (2.0 * f.grid.L)) {}

  double operator()(double x) const { // x in [-L, L)
    double t = (x + L) * inv_h;
    auto j = static_cast<std::int64_t>(t);
    if (j >= n) j = n - 1; // guard against t == n from rounding
    const double f = t - static_cast<double>(j);
    std::int64_t j1 = j + 1;
    if (j1 == n) j1 = 0;
    return v[j] + f * (v[j1] - v[j]);
  }
};

inline double wrap_diff(double d, double L) { // d in (-2L, 2L)
  if (d >= L) return d - 2.0 * L;
  if (d < -L) return d + 2.0 * L;
  return d;
}

void check_1d(const GridFunction& f, const char* what) {
  if (f.grid.dim != 1)
    throw ValidationError("sde.grid", std::string(what) + " must live on a 1D grid");
}

} // namespace

std::int64_t SdeConfig::n_steps() const {
  if (N < 1) throw ValidationError("sde.N", "particle count must be >= 1");
  if (!(sigma > 0.0)) throw ValidationError("sde.sigma", "sigma must be > 0");
  if (!(dt > 0.0)) throw ValidationError("sde.dt", "dt must be > 0");
  if (!(T > 0.0)) throw ValidationError("sde.T", "T must be > 0");
  const double ratio = T / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9) {
    std::ostringstream os;
    os << "T/dt = " << ratio << " must be integral within 1e-9";
    throw ValidationError("sde.dt", os.str());
  }
  return static_cast<std::int64_t>(rounded);
}

std::vector<std::int64_t> SdeConfig::save_steps() const {
  const std::int64_t steps = n_steps();
  std::vector<std::int64_t> out;
  for (double t : save_times) {
    if (t < -1e-12 || t > T + 1e-12)
      throw ValidationError("sde.save_times", "save time outside [0, T]");
    auto s = static_cast<std::int64_t>(std::round(t / dt));
    s = std::clamp<std::int64_t>(s, 0, steps);
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> sample_initial(const GridFunction& rho0, int N,
                                   std::uint64_t seed, std::uint32_t replica_id) {
  check_1d(rho0, "initial density");
  if (!rho0.is_density)
    throw ValidationError("sde.rho0", "initial condition must be density-flagged");
  if (N < 1) throw ValidationError("sde.N", "particle count must be >= 1");

  const Grid& g = rho0.grid;
  const double h = g.h();
  const auto n = static_cast<std::size_t>(g.n);
  std::vector<double> cdf(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    cdf[j + 1] = cdf[j] + std::max(rho0.values[j], 0.0) * h;
  const double total = cdf[n];
  if (!(total > 0.0))
    throw ValidationError("sde.rho0", "initial density has no positive mass");
  for (double& c : cdf) c /= total;

  std::vector<double> x(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const double u = rng::uniform01(seed, replica_id, static_cast<std::uint32_t>(i), 0,
                               rng::Domain::kInitial);
    // first cell with cdf[j+1] >= u
    auto it = std::lower_bound(cdf.begin() + 1, cdf.end(), u);
    auto j = static_cast<std::size_t>(it - cdf.begin() - 1);
    if (j >= n) j = n - 1;
    const double dm = cdf[j + 1] - cdf[j];
    const double frac = dm > 0.0 ? (u - cdf[j]) / dm : 0.5;
    // cell j covers [node(j) - h/2, node(j) + h/2)
    x[static_cast<std::size_t>(i)] =
        g.wrap(g.node(static_cast<std::int64_t>(j)) - 0.5 * h + frac * h);
  }
  return x;
}

ParticleEnsemble make_ensemble(const GridFunction& rho0, const SdeConfig& cfg) {
  ParticleEnsemble ens;
  ens.X = sample_initial(rho0, cfg.N, cfg.seed, cfg.replica_id);
  ens.Y = ens.X;
  ens.xi.assign(ens.X.size(), 0.0);
  return ens;
}

void step_interacting(ParticleEnsemble& ens, const GridFunction& k_eps, double eps,
                      const SdeConfig& cfg, std::int64_t step, bool parallel) {
  check_1d(k_eps, "interaction kernel");
  const auto N = static_cast<std::int64_t>(ens.X.size());
  if (N != cfg.N)
    throw ValidationError("sde.N", "ensemble size does not match config");
  if (ens.xi.size() != ens.X.size()) ens.xi.assign(ens.X.size(), 0.0);

  const double L = k_eps.grid.L;
  const double dt = cfg.dt;
  const double root = cfg.sigma * std::sqrt(dt);
  const double invN = 1.0 / static_cast<double>(N);
  const double safe = L - 4.0 * eps;
  const Interp1 k(k_eps);
  const double* X = ens.X.data();

  std::vector<double> xnew(ens.X.size());
  std::int64_t warn = 0;

#pragma omp parallel for schedule(static) reduction(+ : warn) if (parallel)
  for (std::int64_t i = 0; i < N; ++i) {
    const double xi_pos = X[i];
    double acc = 0.0;
    for (std::int64_t j = 0; j < N; ++j)
      acc += k(wrap_diff(xi_pos - X[j], L));
    const double gauss = rng::normal(cfg.seed, cfg.replica_id, static_cast<std::uint32_t>(i),
                                static_cast<std::uint32_t>(step), rng::Domain::kBrownian);
    ens.xi[static_cast<std::size_t>(i)] = gauss;
    double x = xi_pos + dt * (-invN * acc) + root * gauss;
    if (x < -safe || x >= safe) ++warn;
    xnew[static_cast<std::size_t>(i)] = k_eps.grid.wrap(x);
  }
  ens.X.swap(xnew);
  ens.boundary_warnings += warn;
}

void step_meanfield(ParticleEnsemble& ens, const GridFunction& force_field,
                    double field_time, double eps, const SdeConfig& cfg,
                    std::int64_t step, bool parallel) {
  check_1d(force_field, "mean-field force");
  const auto N = static_cast<std::int64_t>(ens.Y.size());
  const double t_now = static_cast<double>(step) * cfg.dt;
  if (std::abs(field_time - t_now) > 0.5 * cfg.dt) {
    std::ostringstream os;
    os << "mean-field force slice at t = " << field_time
       << " does not match the SDE clock t = " << t_now;
    throw ValidationError("sde.field_time", os.str());
  }
  if (ens.xi.size() != ens.Y.size())
    throw ValidationError("sde.xi", "no recorded increments for this step");

  const double L = force_field.grid.L;
  const double dt = cfg.dt;
  const double root = cfg.sigma * std::sqrt(dt);
  const double safe = L - 4.0 * eps;
  const Interp1 f(force_field);
  std::int64_t warn = 0;

#pragma omp parallel for schedule(static) reduction(+ : warn) if (parallel)
  for (std::int64_t i = 0; i < N; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    double y = ens.Y[ui] + dt * (-f(ens.Y[ui])) + root * ens.xi[ui];
    if (y < -safe || y >= safe) ++warn;
    ens.Y[ui] = force_field.grid.wrap(y);
  }
  ens.boundary_warnings += warn;
}

double max_coupling(ParticleEnsemble& ens, double L, bool update_running) {
  double m = 0.0;
  for (std::size_t i = 0; i < ens.X.size(); ++i) {
    double d = std::abs(ens.X[i] - ens.Y[i]);
    d = std::min(d, 2.0 * L - d); // periodic distance
    m = std::max(m, d);
  }
  if (update_running) ens.running_max_coupling = std::max(ens.running_max_coupling, m);
  return m;
}

GridFunction deposit(const EmpiricalMeasure& mu, const Grid& g) {
  if (g.dim != 1)
    throw ValidationError("sde.grid", "deposit is defined on 1D grids");
  if (mu.positions.empty())
    throw ValidationError("sde.mu", "empirical measure has no particles");
  GridFunction out(g);
  const double inv_h = 1.0 / g.h();
  const double w = mu.weight() * inv_h; // mass 1/N spread over one cell width
  const std::int64_t n = g.n;
  for (double p : mu.positions) {
    const double x = g.wrap(p);
    double t = (x + g.L) * inv_h;
    auto j = static_cast<std::int64_t>(t);
    if (j >= n) j = n - 1;
    const double f = t - static_cast<double>(j);
    std::int64_t j1 = j + 1;
    if (j1 == n) j1 = 0;
    out.values[static_cast<std::size_t>(j)] += (1.0 - f) * w;
    out.values[static_cast<std::size_t>(j1)] += f * w;
  }
  out.is_density = true;
  return out;
}

GridFunction empirical_convolution(const EmpiricalMeasure& mu, const GridFunction& V_eps,
                                   EmpConvPath path, bool parallel) {
  check_1d(V_eps, "convolution kernel");
  const Grid& g = V_eps.grid;
  if (path == EmpConvPath::kDeposit) {
    return convolve(deposit(mu, g), V_eps);
  }
  GridFunction out(g);
  const double w = mu.weight();
  const Interp1 V(V_eps);
  const std::int64_t n = g.n;
  const double L = g.L;
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t a = 0; a < n; ++a) {
    const double y = g.node(a);
    double acc = 0.0;
    for (double p : mu.positions) acc += V(wrap_diff(y - g.wrap(p), L));
    out.values[static_cast<std::size_t>(a)] = w * acc;
  }
  return out;
}

double lln_defect(const std::vector<double>& Y, const GridFunction& k_eps,
                  const GridFunction& force_field, EmpConvPath path, bool parallel) {
  check_1d(k_eps, "interaction kernel");
  if (!(k_eps.grid == force_field.grid))
    throw ValidationError("sde.grid", "kernel and force field must share a grid");
  const auto N = static_cast<std::int64_t>(Y.size());
  if (N == 0) throw ValidationError("sde.mu", "no particles");
  const double L = k_eps.grid.L;
  const Interp1 f(force_field);
  double defect = 0.0;

  if (path == EmpConvPath::kDeposit) {
    EmpiricalMeasure mu{Y};
    GridFunction emp = convolve(deposit(mu, k_eps.grid), k_eps);
    const Interp1 e(emp);
#pragma omp parallel for schedule(static) reduction(max : defect) if (parallel)
    for (std::int64_t i = 0; i < N; ++i) {
      const double y = k_eps.grid.wrap(Y[static_cast<std::size_t>(i)]);
      defect = std::max(defect, std::abs(e(y) - f(y)));
    }
    return defect;
  }

  const Interp1 k(k_eps);
  const double invN = 1.0 / static_cast<double>(N);
#pragma omp parallel for schedule(static) reduction(max : defect) if (parallel)
  for (std::int64_t i = 0; i < N; ++i) {
    const double yi = k_eps.grid.wrap(Y[static_cast<std::size_t>(i)]);
    double acc = 0.0;
    for (std::int64_t j = 0; j < N; ++j)
      acc += k(wrap_diff(yi - k_eps.grid.wrap(Y[static_cast<std::size_t>(j)]), L));
    defect = std::max(defect, std::abs(invN * acc - f(yi)));
  }
  return defect;
}

} // namespace chaoslab

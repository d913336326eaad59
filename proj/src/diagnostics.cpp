#include "chaoslab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chaoslab/errors.hpp"
#include "chaoslab/pde.hpp"
#include "chaoslab/reduce.hpp"
#include "chaoslab/rng.hpp"

namespace chaoslab {

namespace {

double quadrature_of_square(const GridFunction& f) {
  double hpow = 1.0;
  for (int a = 0; a < f.grid.dim; ++a) hpow *= f.grid.h();
  return hpow * blocked_dot(f.values.data(), f.values.data(), f.values.size());
}

} // namespace

double mollified_l2(const EmpiricalMeasure& mu, const GridFunction& rho_eps,
                    const GridFunction& V_eps, EmpConvPath path, bool parallel) {
  if (!(rho_eps.grid == V_eps.grid))
    throw ValidationError("diagnostics.grid", "density and kernel must share a grid");
  GridFunction emp = empirical_convolution(mu, V_eps, path, parallel);
  GridFunction ref = convolve(V_eps, rho_eps);
  return mollified_l2_from(emp, ref);
}

double mollified_l2_from(const GridFunction& emp_conv, const GridFunction& v_rho) {
  if (!(emp_conv.grid == v_rho.grid))
    throw ValidationError("diagnostics.grid", "fields must share a grid");
  GridFunction diff(emp_conv.grid);
  for (std::size_t a = 0; a < diff.values.size(); ++a)
    diff.values[a] = emp_conv.values[a] - v_rho.values[a];
  return quadrature_of_square(diff);
}

double modulated_energy(const EmpiricalMeasure& mu, const GridFunction& rho_eps,
                        const KernelPair& pair, double sigma, EmpConvPath path,
                        bool parallel) {
  if (!(sigma > 0.0))
    throw ValidationError("diagnostics.sigma", "sigma must be > 0");
  const Grid& g = rho_eps.grid;
  if (!(pair.V.grid == g) || !(pair.W.grid == g))
    throw ValidationError("diagnostics.grid", "pair and density must share a grid");

  GridFunction w_refl = reflect(pair.W);
  GridFunction a, b;
  if (path == EmpConvPath::kDeposit) {
    GridFunction m = deposit(mu, g);
    for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] -= rho_eps.values[i];
    m.is_density = false;
    a = convolve(w_refl, m);
    b = convolve(pair.V, m);
  } else {
    a = empirical_convolution(mu, w_refl, path, parallel);
    GridFunction ar = convolve(w_refl, rho_eps);
    for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] -= ar.values[i];
    b = empirical_convolution(mu, pair.V, path, parallel);
    GridFunction br = convolve(pair.V, rho_eps);
    for (std::size_t i = 0; i < b.values.size(); ++i) b.values[i] -= br.values[i];
  }
  double hpow = 1.0;
  for (int ax = 0; ax < g.dim; ++ax) hpow *= g.h();
  const double inner = hpow * blocked_dot(a.values.data(), b.values.data(), a.values.size());
  return inner / (sigma * sigma);
}

BoundValue entropy_bound_rhs(const std::vector<DiagnosticsRecord>& records,
                             double w_norm_l2, double sigma, double t_upper) {
  if (records.size() < 8)
    throw ValidationError("diagnostics.replicas",
                          "entropy bound needs at least 8 replicas");
  if (!(sigma > 0.0))
    throw ValidationError("diagnostics.sigma", "sigma must be > 0");
  std::vector<double> integrals;
  integrals.reserve(records.size());
  for (const auto& r : records) {
    if (r.times.size() != r.l2_moll.size() || r.times.size() < 2)
      throw ValidationError("diagnostics.records", "malformed l2 time series");
    std::vector<double> t, y;
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      if (t_upper >= 0.0 && r.times[i] > t_upper + 1e-12) break;
      t.push_back(r.times[i]);
      y.push_back(r.l2_moll[i]);
    }
    if (t.size() < 2)
      throw ValidationError("diagnostics.records", "t_upper leaves fewer than 2 points");
    integrals.push_back(trapezoid(t, y));
  }
  const MeanStderr ms = mean_stderr(integrals);
  const double factor = (w_norm_l2 * w_norm_l2) / (sigma * sigma);
  return BoundValue{factor * ms.mean, factor * ms.stderr_mean, ms.n};
}

WilsonInterval coupling_event_frequency(const std::vector<DiagnosticsRecord>& records,
                                        double alpha, int N) {
  if (records.size() < 8)
    throw ValidationError("diagnostics.replicas",
                          "event frequency needs at least 8 replicas");
  const double threshold = std::pow(static_cast<double>(N), -alpha);
  int hits = 0;
  for (const auto& r : records) {
    const double sup =
        r.coupling_max.empty() ? 0.0 : *std::max_element(r.coupling_max.begin(),
                                                         r.coupling_max.end());
    if (sup >= threshold) ++hits;
  }
  return wilson_interval(hits, static_cast<int>(records.size()));
}

WilsonInterval lln_event_frequency(const std::vector<DiagnosticsRecord>& records,
                                   double alpha, double delta, int N) {
  if (!(alpha + delta > 0.0) || !(alpha + delta < 0.5))
    throw ValidationError("diagnostics.alpha_delta",
                          "need 0 < alpha + delta < 1/2");
  if (records.size() < 8)
    throw ValidationError("diagnostics.replicas",
                          "event frequency needs at least 8 replicas");
  const double threshold = std::pow(static_cast<double>(N), -(delta + alpha));
  int hits = 0, trials = 0;
  for (const auto& r : records)
    for (double d : r.lln_defect) {
      ++trials;
      if (d > threshold) ++hits;
    }
  return wilson_interval(hits, trials);
}

EstimateWithError marginal_entropy_estimate(const std::vector<double>& samples_x1,
                                            const GridFunction& rho_eps,
                                            const GridFunction& V_eps,
                                            std::uint64_t seed, int bootstrap) {
  if (samples_x1.size() < 64)
    throw ValidationError("diagnostics.samples",
                          "marginal entropy needs at least 64 pooled samples");
  if (!(rho_eps.grid == V_eps.grid))
    throw ValidationError("diagnostics.grid", "density and kernel must share a grid");
  const double v_mass = quadrature(V_eps);
  if (!(v_mass > 0.5))
    throw ValidationError("diagnostics.V_eps",
                          "smoothing kernel must be an approximate identity "
                          "(positive unit mass)");

  GridFunction ref = convolve(V_eps, rho_eps);
  for (double& v : ref.values) v = std::max(v, 0.0);
  const double ref_mass = quadrature(ref);
  for (double& v : ref.values) v /= ref_mass;
  ref.is_density = true;

  auto kde_entropy = [&](const std::vector<double>& pts) {
    EmpiricalMeasure mu{pts};
    GridFunction kde = empirical_convolution(mu, V_eps, EmpConvPath::kDeposit);
    for (double& v : kde.values) v = std::max(v, 0.0);
    const double mass = quadrature(kde);
    for (double& v : kde.values) v /= mass;
    kde.is_density = true;
    return relative_entropy(kde, ref);
  };

  EstimateWithError out;
  out.value = kde_entropy(samples_x1);

  const auto M = static_cast<std::uint32_t>(samples_x1.size());
  std::vector<double> boot(static_cast<std::size_t>(bootstrap));
  std::vector<double> resample(samples_x1.size());
  for (int b = 0; b < bootstrap; ++b) {
    for (std::uint32_t s = 0; s < M; ++s) {
      const double u = rng::uniform01(seed, static_cast<std::uint32_t>(b), s, 0,
                                 rng::Domain::kBootstrap);
      auto idx = static_cast<std::size_t>(u * M);
      if (idx >= M) idx = M - 1;
      resample[s] = samples_x1[idx];
    }
    boot[static_cast<std::size_t>(b)] = kde_entropy(resample);
  }
  // bootstrap standard error = standard deviation of the replicates
  const MeanStderr ms = mean_stderr(boot);
  out.stderr_value = ms.stderr_mean * std::sqrt(static_cast<double>(ms.n));
  return out;
}

OlsFit rate_fit(const std::vector<double>& N_values, const std::vector<double>& values) {
  if (N_values.size() < 4)
    throw ValidationError("diagnostics.rate_fit", "need at least 4 N values");
  for (double v : values)
    if (!(v > 0.0))
      throw ValidationError("diagnostics.rate_fit", "values must be positive");
  return ols_loglog(N_values, values);
}

RateTable predicted_rate_table(const KernelPair& pair, double alpha, double beta,
                               double gamma) {
  const double aw = pair.a_W, av = pair.a_V;
  RateTable t;
  t.labels = {"C/(N eps^{2aW+4aV})", "C/(N^{2alpha} eps^{2aW+4aV})",
              "C/(N^{alpha+1/2} eps^{aW+3aV})", "C/(N^{gamma} eps^{2aW+4aV})"};
  t.exponents[0] = -1.0 + (2.0 * aw + 4.0 * av) * beta;
  t.exponents[1] = -2.0 * alpha + (2.0 * aw + 4.0 * av) * beta;
  t.exponents[2] = -(alpha + 0.5) + (aw + 3.0 * av) * beta;
  t.exponents[3] = -gamma + (2.0 * aw + 4.0 * av) * beta;
  t.binding_index = 0;
  for (int i = 1; i < 4; ++i)
    if (t.exponents[static_cast<std::size_t>(i)] >
        t.exponents[static_cast<std::size_t>(t.binding_index)])
      t.binding_index = i;
  t.binding_exponent = t.exponents[static_cast<std::size_t>(t.binding_index)];
  return t;
}

std::array<double, 4> mollifier_case_exponents(double a_k, double alpha, double beta,
                                               double gamma) {
  return {2.0 * alpha - beta - (2.0 * a_k + 2.0) * beta,
          alpha + 0.5 - 3.0 * beta - (a_k + 1.0) * beta,
          2.0 * alpha - 3.0 * beta - a_k * beta,
          gamma - (3.0 + 2.0 * a_k) * beta};
}

SweepRow aggregate_records(int N, double eps,
                           const std::vector<DiagnosticsRecord>& records, double alpha,
                           double delta, double w_norm_l2, double sigma) {
  if (records.empty())
    throw ValidationError("diagnostics.records", "no records to aggregate");
  SweepRow row;
  row.N = N;
  row.eps = eps;

  std::vector<double> sup_l2, int_dx, sup_ke;
  for (const auto& r : records) {
    sup_l2.push_back(r.l2_moll.empty()
                         ? 0.0
                         : *std::max_element(r.l2_moll.begin(), r.l2_moll.end()));
    int_dx.push_back(r.times.size() >= 2 ? trapezoid(r.times, r.l2_moll_dx) : 0.0);
    double m = 0.0;
    for (double k : r.modulated_energy) m = std::max(m, std::abs(k));
    sup_ke.push_back(m);
  }
  row.sup_l2 = mean_stderr(sup_l2);
  row.int_l2_dx = mean_stderr(int_dx);
  row.sup_abs_ke = mean_stderr(sup_ke);

  if (records.size() >= 8) {
    row.coupling_freq = coupling_event_frequency(records, alpha, N);
    row.lln_freq = lln_event_frequency(records, alpha, delta, N);
    row.entropy_bound = entropy_bound_rhs(records, w_norm_l2, sigma);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.coupling_freq = WilsonInterval{nan, nan, nan};
    row.lln_freq = WilsonInterval{nan, nan, nan};
    row.entropy_bound = BoundValue{nan, nan, static_cast<int>(records.size())};
  }
  return row;
}

} // namespace chaoslab

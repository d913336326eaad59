#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "chaoslab/grid.hpp"
#include "chaoslab/kernels.hpp"
#include "chaoslab/sde.hpp"
#include "chaoslab/stats.hpp"

namespace chaoslab {

/// Per-replica estimator time series, one entry per save time.
struct DiagnosticsRecord {
  std::uint32_t replica_id = 0;
  std::vector<double> times;
  std::vector<double> l2_moll;          ///< ||V_eps*(mu - rho_eps)||_L2^2
  std::vector<double> l2_moll_dx;       ///< same with d/dx V_eps
  std::vector<double> modulated_energy; ///< K_N via the reflection identity
  std::vector<double> coupling_max;     ///< running max_i |X^i - Y^i|
  std::vector<double> lln_defect;       ///< max_i |(1/N)sum_j k(Y^i-Y^j) - (k*rho)(Y^i)|
  std::int64_t boundary_warnings = 0;   ///< truncation-proximity events
};

/// ||V_eps * mu - V_eps * rho_eps||_L2^2 on the grid of V_eps.
double mollified_l2(const EmpiricalMeasure& mu, const GridFunction& rho_eps,
                    const GridFunction& V_eps,
                    EmpConvPath path = EmpConvPath::kDeposit, bool parallel = true);

/// Same quantity from precomputed fields: the empirical convolution
/// V_eps * mu and the reference V_eps * rho_eps.
double mollified_l2_from(const GridFunction& emp_conv, const GridFunction& v_rho);

/// Modulated energy K_N = (1/sigma^2) <W~_eps*(mu - rho), V_eps*(mu - rho)>
/// with W~(x) = W(-x); for symmetric even pairs this is a squared norm.
double modulated_energy(const EmpiricalMeasure& mu, const GridFunction& rho_eps,
                        const KernelPair& pair, double sigma,
                        EmpConvPath path = EmpConvPath::kDeposit, bool parallel = true);

/// A Monte Carlo scalar with its standard error.
struct BoundValue {
  double value = 0.0;
  double stderr_value = 0.0;
  int n = 0;
};

/// The computable relative-entropy upper bound
///   (||W_eps||_L2^2 / sigma^2) E Integral_0^t ||V_eps*(mu_s - rho_s)||^2 ds,
/// trapezoid in s over the record save times up to t_upper (t_upper < 0
/// means the full range). Requires >= 8 replicas.
BoundValue entropy_bound_rhs(const std::vector<DiagnosticsRecord>& records,
                             double w_norm_l2, double sigma, double t_upper = -1.0);

/// Fraction of replicas with sup_t max_i |X^i - Y^i| >= N^{-alpha}.
WilsonInterval coupling_event_frequency(const std::vector<DiagnosticsRecord>& records,
                                        double alpha, int N);

/// Fraction of (replica, save time) pairs with lln_defect > N^{-(delta+alpha)}
/// — the complement frequency of the B_t^alpha events. Requires
/// 0 < alpha + delta < 1/2.
WilsonInterval lln_event_frequency(const std::vector<DiagnosticsRecord>& records,
                                   double alpha, double delta, int N);

/// Estimate with a bootstrap standard error.
struct EstimateWithError {
  double value = 0.0;
  double stderr_value = 0.0;
};

/// Kernel-density marginal entropy: smooth the pooled first-particle samples
/// with V_eps, smooth rho_eps identically, and return their relative
/// entropy with a bootstrap standard error. Requires >= 64 samples and an
/// approximate-identity V_eps (positive unit mass).
EstimateWithError marginal_entropy_estimate(const std::vector<double>& samples_x1,
                                            const GridFunction& rho_eps,
                                            const GridFunction& V_eps,
                                            std::uint64_t seed, int bootstrap = 200);

/// Log-log OLS of value against N; requires >= 4 points, all values > 0.
OlsFit rate_fit(const std::vector<double>& N_values, const std::vector<double>& values);

/// Net N-exponents of the four error terms of the admissible-pair bound
/// under the moderate scaling eps = N^{-beta}, and which one binds
/// (largest, i.e. slowest decay).
struct RateTable {
  std::array<std::string, 4> labels;
  std::array<double, 4> exponents;
  int binding_index = 0;
  double binding_exponent = 0.0;
};

RateTable predicted_rate_table(const KernelPair& pair, double alpha, double beta,
                               double gamma);

/// The mollifier-case display list (a_k parameterization): exponents e with
/// the bound decaying like N^{-e} term by term.
std::array<double, 4> mollifier_case_exponents(double a_k, double alpha, double beta,
                                               double gamma);

/// Per-N aggregate across replicas.
struct SweepRow {
  int N = 0;
  double eps = 0.0;
  MeanStderr sup_l2;       ///< E sup_t l2_moll
  MeanStderr int_l2_dx;    ///< E Integral l2_moll_dx dt
  MeanStderr sup_abs_ke;   ///< E sup_t |K_N|
  WilsonInterval coupling_freq;
  WilsonInterval lln_freq;
  BoundValue entropy_bound; ///< NaN fields when fewer than 8 replicas
};

SweepRow aggregate_records(int N, double eps,
                           const std::vector<DiagnosticsRecord>& records, double alpha,
                           double delta, double w_norm_l2, double sigma);

} // namespace chaoslab

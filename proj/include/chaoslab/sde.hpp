#pragma once

#include <cstdint>
#include <vector>

#include "chaoslab/grid.hpp"
#include "chaoslab/kernels.hpp"

namespace chaoslab {

/// Time-stepping configuration for one coupled replica (1D dynamics).
struct SdeConfig {
  int N = 0;                      ///< particle count
  double sigma = 0.5;             ///< diffusion coefficient, > 0
  double T = 0.5;                 ///< final time
  double dt = 1.0 / 128.0;        ///< step size
  std::vector<double> save_times; ///< subset of [0, T], snapped to steps
  std::uint64_t seed = 0;
  std::uint32_t replica_id = 0;

  /// Number of steps; throws ValidationError unless T/dt is integral
  /// within 1e-9 and all fields satisfy their invariants.
  std::int64_t n_steps() const;
  /// save_times snapped to step boundaries, as step indices (deduplicated,
  /// sorted). Throws if any time falls outside [0, T].
  std::vector<std::int64_t> save_steps() const;
};

/// Coupled pair of particle systems sharing Brownian increments: X follows
/// the interacting dynamics, Y the mean-field dynamics, started from the
/// same initial positions.
struct ParticleEnsemble {
  std::vector<double> X;
  std::vector<double> Y;
  std::vector<double> xi; ///< standard normals of the latest step (shared)
  double running_max_coupling = 0.0;
  std::int64_t boundary_warnings = 0; ///< X or Y left [-L+4eps, L-4eps)
};

/// Uniform atomic measure (1/N) sum of delta(x - positions[i]).
struct EmpiricalMeasure {
  std::vector<double> positions;
  double weight() const { return 1.0 / static_cast<double>(positions.size()); }
};

/// N i.i.d. draws from a grid density by piecewise-linear inverse-CDF
/// (cell j is [node(j)-h/2, node(j)+h/2) with constant density).
/// Requires rho0 to be 1D and density-flagged.
std::vector<double> sample_initial(const GridFunction& rho0, int N,
                                   std::uint64_t seed, std::uint32_t replica_id);

/// Fresh ensemble with X = Y = sample_initial(...).
ParticleEnsemble make_ensemble(const GridFunction& rho0, const SdeConfig& cfg);

/// One Euler-Maruyama step of the interacting system:
///   X^i += -dt (1/N) sum_j k_eps(X^i - X^j) + sigma sqrt(dt) xi^i,
/// the sum over j including j = i, k_eps interpolated from the grid, xi^i
/// drawn from the (seed, replica, i, step) counter stream and recorded in
/// ens.xi for the coupled mean-field step. Positions wrap periodically;
/// excursions outside [-L+4eps, L-4eps) bump the boundary counter.
void step_interacting(ParticleEnsemble& ens, const GridFunction& k_eps, double eps,
                      const SdeConfig& cfg, std::int64_t step, bool parallel = true);

/// One Euler-Maruyama step of the mean-field system using the increments
/// recorded by the matching step_interacting call:
///   Y^i += -dt * force_field(Y^i) + sigma sqrt(dt) xi^i.
/// force_field is k_eps convolved with the PDE slice at field_time; a
/// mismatch |field_time - step*dt| > dt/2 is an error.
void step_meanfield(ParticleEnsemble& ens, const GridFunction& force_field,
                    double field_time, double eps, const SdeConfig& cfg,
                    std::int64_t step, bool parallel = true);

/// max_i of the periodic distance |X^i - Y^i|; also folds the value into
/// ens.running_max_coupling when update_running is set.
double max_coupling(ParticleEnsemble& ens, double L, bool update_running = true);

/// Deposit the empirical measure onto the grid with the multilinear weights
/// of evaluate_at; the result integrates to 1 and is density-flagged.
GridFunction deposit(const EmpiricalMeasure& mu, const Grid& g);

enum class EmpConvPath {
  kDeposit, ///< deposit onto the grid, then FFT convolution (default)
  kDirect,  ///< direct summation of interpolated kernel shifts
};

/// (V_eps * mu)(y) = (1/N) sum_i V_eps(y - X^i) on the grid of V_eps.
GridFunction empirical_convolution(const EmpiricalMeasure& mu, const GridFunction& V_eps,
                                   EmpConvPath path = EmpConvPath::kDeposit,
                                   bool parallel = true);

/// max_i |(1/N) sum_j k_eps(Y^i - Y^j) - force_field(Y^i)| — the law of
/// large numbers defect behind the B_t^alpha events. The deposit path
/// reuses the FFT convolution; the direct path is the O(N^2) reference.
double lln_defect(const std::vector<double>& Y, const GridFunction& k_eps,
                  const GridFunction& force_field,
                  EmpConvPath path = EmpConvPath::kDeposit, bool parallel = true);

} // namespace chaoslab

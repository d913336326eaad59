#pragma once

#include <cstdint>

#include "chaoslab/grid.hpp"
#include "chaoslab/kernels.hpp"

namespace chaoslab {

/// State of the 1D aggregation-diffusion solve
///   d/dt rho = (sigma^2/2) rho_xx + d/dx (rho * (k_eps * rho)).
struct PdeState {
  GridFunction rho; ///< density-flagged, d = 1
  double t = 0.0;
  double sigma = 0.5;
  std::int64_t clipped_cells = 0;  ///< cells clipped below -kTolNeg (cumulative)
  double renorm_total = 0.0;       ///< cumulative |mass correction|
};

/// State of the N = 2 Liouville solve on (x1, x2):
///   d/dt rho2 = (sigma^2/2) Lap rho2 + div(rho2 * b),
/// b_i(x) = (1/2) k_eps(x_i - x_j).
struct Liouville2State {
  GridFunction rho2; ///< density-flagged, d = 2
  double t = 0.0;
  double sigma = 0.5;
  std::int64_t clipped_cells = 0;
  double renorm_total = 0.0;
};

PdeState make_pde_state(GridFunction rho0, double sigma);
Liouville2State make_liouville2_state(GridFunction rho2_0, double sigma);

/// One Strang-split step: half-step spectral diffusion (exact on the grid),
/// SSP-RK2 conservative van Leer-limited transport with the nonlocal
/// velocity u = -(k_eps * rho) recomputed per stage, half-step diffusion.
/// Negative undershoot is clipped and the mass renormalized (logged in the
/// state counters). Throws NumericalError when dt violates the transport
/// CFL condition dt <= h / (2 max|u|), reporting the admissible dt.
void pde_step(PdeState& state, const GridFunction& k_eps, double dt, bool parallel = true);

/// Same splitting in 2D with drift b_i = (1/2) k_eps(x_i - x_j); the unsplit
/// flux divergence treats both axes symmetrically, preserving exchange
/// symmetry of symmetric initial data.
void liouville2_step(Liouville2State& state, const GridFunction& k_eps, double dt,
                     bool parallel = true);

/// Counters attached to a relative_entropy evaluation.
struct RelEntropyStats {
  std::int64_t floored_cells = 0; ///< q below floor while p above tol
  double floor_q = 0.0;
};

/// Unnormalized relative entropy Integral p log(p/q) by quadrature.
/// Convention: cells with p <= kTolNeg contribute 0; cells with
/// q <= floor_q = 1e-30 max(q) (and p above tol) contribute p log(p/floor_q).
double relative_entropy(const GridFunction& p, const GridFunction& q,
                        RelEntropyStats* stats = nullptr);

/// Integral |p - q| by quadrature (same grid).
double l1_distance(const GridFunction& p, const GridFunction& q);

/// Integral |k - k_eps|^2 (x) (rho ster rho~)(x) dx with rho~(y) = rho(-y),
/// the de-regularization remainder of the limiting argument, computed with
/// one FFT autocorrelation. All inputs 1D on one grid.
double deregularization_residual(const GridFunction& k, const GridFunction& k_eps,
                                 const GridFunction& rho);

} // namespace chaoslab

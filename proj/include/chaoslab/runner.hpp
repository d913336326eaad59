#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chaoslab/config.hpp"
#include "chaoslab/diagnostics.hpp"
#include "chaoslab/pde.hpp"

namespace chaoslab {

/// Grid density from an init block (gaussian or uniform), renormalized.
GridFunction initial_density(const InitConfig& init, const Grid& g);

/// Kernel pair for the configured family at width eps on grid g.
KernelPair build_pair(const KernelConfig& k, double eps, const Grid& g);

/// Everything about the mean-field side that replicas share: the 1D PDE
/// solution, the per-step drift fields, and the spectral machinery for the
/// per-save-time estimators.
struct MeanFieldSolution {
  Grid grid;
  double eps = 0.0;
  double dt = 0.0;  ///< SDE step
  int substeps = 1; ///< PDE substeps per SDE step
  std::vector<std::int64_t> save_steps;
  std::vector<double> save_times;
  GridFunction rho0;
  KernelPair pair;
  GridFunction k_eps;                  ///< assembled force kernel
  std::vector<GridFunction> force_at_step; ///< k_eps * rho at t = s dt (size steps+1)
  std::vector<GridFunction> rho_save;      ///< rho at save steps
  std::vector<Spectrum> rho_hat_save;
  Spectrum v_hat;                 ///< spectrum of V_eps
  Spectrum vx_hat;                ///< spectrum of d/dx V_eps
  std::vector<double> wv_weight;  ///< Re(W^_k V^_k) per mode
  double w_l2 = 0.0;              ///< ||W_eps||_L2
  std::int64_t pde_clipped = 0;
  double pde_renorm = 0.0;
};

MeanFieldSolution solve_mean_field(const ExperimentConfig& cfg, int N, double eps);

struct TrajectoryRow {
  double t = 0.0;
  int i = 0;
  double x = 0.0;
  double y = 0.0;
};

/// One coupled replica against a precomputed mean-field solution; returns
/// the per-save-time diagnostics record. Optionally captures the final
/// interacting positions and the trajectory at save times.
DiagnosticsRecord run_replica(const ExperimentConfig& cfg, const MeanFieldSolution& mf,
                              int N, std::uint32_t replica_id,
                              std::vector<double>* final_x = nullptr,
                              std::vector<TrajectoryRow>* trajectory = nullptr,
                              bool parallel = true);

int run_simulate(const ExperimentConfig& cfg);
int run_kernel_check(const ExperimentConfig& cfg);
int run_liouville_oracle(const ExperimentConfig& cfg);
int run_pde_compare(const ExperimentConfig& cfg);
int run_rate_sweep(const ExperimentConfig& cfg);

} // namespace chaoslab

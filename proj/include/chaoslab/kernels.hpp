#pragma once

#include <functional>
#include <vector>

#include "chaoslab/grid.hpp"

namespace chaoslab {

/// Gamma function via the Lanczos approximation (g = 7, 9 coefficients).
double lanczos_gamma(double z);

enum class MollifierBase { kBump, kGaussian };

struct MollifierSpec {
  MollifierBase base = MollifierBase::kBump;
  double eps = 0.1;
};

/// The scaled mollifier J^eps(x) = eps^-d J(x/eps), renormalized so that the
/// grid quadrature is exactly 1.
///   bump:     J(x) = c exp(-1/(1-|x|^2)) on |x|<1 (c fixed numerically);
///             requires eps >= 4h.
///   gaussian: J = standard normal density, so J^eps has standard deviation
///             eps per axis; allowed down to eps >= h (with a resolution
///             warning below 2h recorded on the result's warning counter).
GridFunction make_mollifier(const MollifierSpec& spec, const Grid& g);

/// Weierstrass (heat) kernel h^eps(x) = (4 pi eps)^{-d/2} exp(-|x|^2/(4 eps)).
/// Equals the gaussian mollifier at parameter sqrt(2 eps).
GridFunction weierstrass_kernel(double eps, const Grid& g);

/// Cut-off zeta^eps(x) = zeta(eps x): 1 on B(0,1/eps), 0 outside B(0,2/eps),
/// quintic smoothstep in |x| between the radii.
GridFunction make_cutoff(double eps, const Grid& g);

enum class PairMode { kProduct, kGradientProduct };

/// Admissible approximation pair (W^eps, V^eps): the interaction force is
///   product mode:          k^eps = force_sign * (W*V)          (scalar, d=1)
///   gradient_product mode: k^eps_i = force_sign * d_i (W*V)    (d components)
/// force_sign is fixed by each family so that the assembled force matches
/// the family's physical force (see bounded_confidence_pair).
struct KernelPair {
  GridFunction W;
  GridFunction V;
  PairMode mode = PairMode::kProduct;
  double force_sign = 1.0;
  bool strongly_admissible = false;
  double eps = 0.0;
  double a_W = 0.0; ///< declared L2 blow-up exponent of W^eps
  double a_V = 0.0; ///< declared H2 blow-up exponent of V^eps
};

/// The d force components k^eps on the pair's grid.
std::vector<GridFunction> assemble_force(const KernelPair& pair);

/// The mollified interaction potential W^eps * V^eps.
GridFunction pair_potential(const KernelPair& pair);

// --- bounded-confidence family (d = 1) ---

/// k_U(x) = sign(x) on |x| <= R, 0 otherwise.
GridFunction bounded_confidence_force(double R, const Grid& g);
/// U(x) = -(R - |x|)^+ , the potential with dU/dx = k_U.
GridFunction bounded_confidence_potential(double R, const Grid& g);

enum class BcRoute {
  kForce,     ///< W = cutoff*(k_U * J^eps), V = J^eps, product mode
  kPotential, ///< W = V = 1_{[-R/2,R/2]} * J^eps, gradient mode, sign -1
};
KernelPair bounded_confidence_pair(double R, double eps, const Grid& g, BcRoute route);

// --- Coulomb / Keller-Segel family ---

/// Periodized Newtonian potential on the torus: real-space image sum plus
/// the neutralizing-background term, mean-free, with the origin node set to
/// the average of its 2d nearest neighbours. d = 2 or 3.
GridFunction coulomb_potential(const Grid& g);

enum class CoulombRoute { kMollifyBoth, kFourierSqrt, kWeierstrassSqrt };

/// d=3 (all routes) or d=2 (mollify_both only). The sqrt routes build the
/// symmetric factor V^eps = c F^{-1}(|xi|^{-1} F^{1/2}) with the |xi|=0 mode
/// set to zero; the assembled force is -grad(W*V).
KernelPair coulomb_factorized_pair(int d, double eps, const Grid& g, CoulombRoute route);

// --- Bessel family ---

/// G = F^{-1}[(1 + 4 pi^2 |xi|^2)^{-1}] constructed spectrally.
GridFunction bessel_potential(const Grid& g);
/// Independent oracle: subordination formula
/// G(x) = (4 pi)^{-d/2} Integral_0^inf exp(-t - |x|^2/(4t)) t^{-d/2} dt.
GridFunction bessel_potential_subordination(const Grid& g);

enum class BesselRoute { kWeierstrass, kMollifier };
KernelPair bessel_pair(double eps, const Grid& g, BesselRoute route);

// --- certification ---

/// Mean-free relative L2 residual of (W*V) against an independently built
/// mollified potential (potentials are defined up to an additive constant).
double factorization_residual(const KernelPair& pair, const GridFunction& oracle);

struct ScalingFit {
  std::vector<double> eps;
  std::vector<double> norms;
  double slope = 0.0;
  double intercept = 0.0;
};

/// Fit log ||J^eps||_{H^m} vs log eps over the eps list.
ScalingFit certify_mollifier_scaling(MollifierBase base, const std::vector<double>& eps_list,
                                     const Grid& g, double m);

struct AdmissibilityRow {
  double eps = 0.0;
  double w_l2 = 0.0;
  double v_h2 = 0.0;
  double w_h2 = 0.0;
};

struct AdmissibilityCert {
  std::vector<AdmissibilityRow> rows;
  double fitted_a_W = 0.0;   ///< -slope of log ||W||_L2 vs log eps
  double fitted_a_V = 0.0;   ///< -slope of log ||V||_H2 vs log eps
  double fitted_a_W_h2 = 0.0;
  double declared_a_W = 0.0;
  double declared_a_V = 0.0;
  bool strongly_admissible = false;
  /// Definition check: fitted blow-up no worse than declared (plus slack).
  bool ok(double slack) const {
    return fitted_a_W <= declared_a_W + slack && fitted_a_V <= declared_a_V + slack;
  }
};

AdmissibilityCert certify_admissible_pair(const std::function<KernelPair(double)>& factory,
                                          const std::vector<double>& eps_list);

/// Resolution warnings recorded by the most recent make_mollifier call on
/// this thread (gaussian base below 2h). Cleared by each call.
int last_mollifier_warnings();

} // namespace chaoslab

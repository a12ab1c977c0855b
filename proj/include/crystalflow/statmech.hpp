#pragma once

#include "crystalflow/grid.hpp"

/// Tilted Gibbs ensemble over integer slopes z with weight
/// exp(-beta |z|^p + eta z), its Legendre transform (the surface tension)
/// and the discrete chemical potential.
namespace crystalflow::statmech {

struct TiltedEnsemble {
  double beta = 1.0;
  double eta = 0.0;
  int p = 2;
  int z_max = 8;  // minimum summation radius around the dominant term

  /// Throws ConfigInvalid for bad parameters and Divergent for p = 1 with |eta| >= beta.
  void validate() const;
};

/// log Z_eta. For p = 2 the sum runs outward from the dominant term until the
/// geometric tail bound falls below 1e-14 of the running sum; p = 1 is summed
/// in closed form.
double log_partition_function(const TiltedEnsemble& ens);
double partition_function(const TiltedEnsemble& ens);

/// Mean slope under the tilted measure, d(log Z)/d(eta).
double tilt_mean(const TiltedEnsemble& ens);
/// Variance of the slope, d^2(log Z)/d(eta)^2.
double tilt_variance(const TiltedEnsemble& ens);

struct Tension {
  double sigma = 0.0;     // sup_eta { eta u - log Z_eta }
  double eta_star = 0.0;  // maximiser: tilt_mean(eta_star) = u
};

/// Legendre transform at mean slope u. The maximiser is found by bracketed
/// bisection with secant refinement to 1e-12 in eta. Throws OutOfRange when
/// u cannot be bracketed.
Tension surface_tension(double u, double beta, int p);

/// kappa^{-1} sigma_D'(kappa u) for p = 2; tends to 2 beta u as kappa grows.
double scaled_tension_limit(double u, double beta, double kappa);

/// mu_k = -2 (h_{k+1} - 2 h_k + h_{k-1}) / dx^2 with dx = h.spacing.
GridField chemical_potential(const GridField& h);

}  // namespace crystalflow::statmech

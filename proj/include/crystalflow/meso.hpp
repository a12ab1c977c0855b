#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "crystalflow/grid.hpp"

/// Mesoscale ODE system for box heights h_k on a periodic grid:
///   dh_k/dt = hop_coef [e^{b mu_{k-1}} - 2 e^{b mu_k} + e^{b mu_{k+1}}] + dep_coef (1 - e^{b mu_k})
/// with mu the discrete chemical potential.
namespace crystalflow::meso {

/// Spacing used inside the chemical potential: `grid` divides the second
/// difference by dx^2 = 1/N^2, `lattice` uses unit spacing.
enum class LaplacianScaling { Grid, Lattice };
std::string_view to_string(LaplacianScaling s) noexcept;
LaplacianScaling parse_laplacian_scaling(std::string_view s);

struct MesoParams {
  double hop_coef = 1.0;
  double dep_coef = 0.0;
  double beta = 1.0;
  std::size_t N = 64;
  LaplacianScaling laplacian = LaplacianScaling::Grid;

  void validate() const;
};

/// Throws GridMismatch if h.size() != N and Overflow if any beta*mu > 700.
GridField smereka_rhs(const GridField& h, const MesoParams& params);

struct MesoControl {
  double tol = 1e-8;  // max-norm local error per step, relative to max(1, |h|_inf)
  double dt_initial = 0.0;
  std::vector<double> sample_times;  // increasing, in (0, t_final]; t_final is always sampled
  std::size_t max_steps = 100'000'000;
};

struct MesoTrajectory {
  std::vector<double> times;
  std::vector<GridField> snapshots;
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

/// Dormand-Prince 5(4) with local extrapolation. Throws StiffnessAbort when
/// dt falls below 1e-14 * t_final.
MesoTrajectory integrate_meso(const GridField& h0, const MesoParams& params, double t_final,
                              const MesoControl& control = {});

}  // namespace crystalflow::meso

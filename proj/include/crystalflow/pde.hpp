#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "crystalflow/functionals.hpp"
#include "crystalflow/grid.hpp"

/// Continuum solvers on the unit torus: the h-form equation
///   h_t = c1 lap(exp(-lap h)) + c2 (1 - exp(-lap h))
/// and its u = exp(-lap h) form with regularised mobility
///   u_t = -u^(1+a) / (u^a + eps^a) (u_xxxx - u_xx).
namespace crystalflow::pde {

/// Time-step control shared by both solvers. With fixed_dt > 0 the step is
/// constant (shortened only to land on sample times); otherwise step
/// doubling estimates the local defect and a PI controller adapts dt.
struct TimeControl {
  double tol = 1e-6;         // max-norm defect per step, relative to max(1, |state|_inf)
  double dt_initial = 0.0;   // 0 => 1e-6 * t_final
  double dt_max = 0.0;       // 0 => unbounded
  double fixed_dt = 0.0;
  bool extrapolate = true;  // adaptive mode only: accept 2 * (two half steps) - (one full step)
  std::vector<double> sample_times;  // increasing, in (0, t_final]; t_final is always sampled
  std::size_t max_steps = 50'000'000;
};

/// exp(-lap h), lap spectral. Throws Overflow if -lap h > 700 anywhere.
GridField u_from_h(const GridField& h);

/// Regularised right-hand side. Throws NonPositiveState if any u <= 0.
GridField regularized_rhs(const GridField& u, const RegParams& reg);

/// One semi-implicit step: mobility frozen at the step start, the operator
/// mbar (d^4 - d^2) with mbar = max mobility taken implicitly per mode and
/// the rest explicit. Throws NonPositiveState if the result has u <= 0.
GridField step_pde(const GridField& u, double dt, const RegParams& reg);

struct PdeRunReport {
  std::vector<double> times;
  std::vector<double> min_u;
  std::vector<double> F;
  std::vector<double> E;
  std::vector<double> F_eps;
  std::vector<double> log_invariant;
  std::vector<double> E_integral;  // trapezoid over accepted steps, from 0 to times[i]

  double worst_E_increase = 0.0;  // max over accepted steps of E(after) - E(before)
  double global_min_u = 0.0;      // min over every accepted step
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

struct PdeRun {
  PdeRunReport report;
  std::vector<GridField> snapshots;  // aligned to report.times (index 0 is t = 0)
};

/// Starts from u0 + eps and integrates to t_final.
PdeRun solve_pde(const GridField& u0, const RegParams& reg, double t_final, const TimeControl& control);

struct HCoefficients {
  double c1 = 1.0;
  double c2 = 1.0;
};

/// One exponential-Euler step. The stiff part -L (c1 d^4 + c2 (-d^2)) with
/// L = max(1, max exp(-lap h)) is integrated exactly per mode, the remainder
/// explicitly. Throws Overflow like u_from_h.
GridField step_h(const GridField& h, double dt, const HCoefficients& coef = {});

struct HTrajectory {
  std::vector<double> times;
  std::vector<GridField> snapshots;
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

HTrajectory solve_h_equation(const GridField& h0, double t_final, const TimeControl& control,
                             const HCoefficients& coef = {});

}  // namespace crystalflow::pde

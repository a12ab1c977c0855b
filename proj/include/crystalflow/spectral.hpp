#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "crystalflow/grid.hpp"

/// Fourier-weighted norms on the discrete torus, the factorial series f_s,
/// its critical thresholds and audits of computed h trajectories.
///
/// Convention: coefficients c_k = (1/N) sum_j f_j exp(-2 pi i k j / N) with
/// integer wavenumber k in [-N/2, N/2) and weight |k|^s (not (2 pi k)^s).
/// Thresholds inherit this convention.
namespace crystalflow::spectral {

struct SpectralProfile {
  std::vector<std::complex<double>> coeffs;  // index k + N/2 for k in [-N/2, N/2)

  static SpectralProfile from_field(const GridField& f);
  std::size_t size() const noexcept { return coeffs.size(); }
  std::complex<double> at(long k) const;
  /// Largest |c_k - conj(c_{-k})| over the pairs that exist.
  double conjugate_asymmetry() const;
};

/// sum_{k != 0} |k|^s |c_k|. Requires s > -1.
double s_norm(const GridField& f, double s);
double s_norm(const SpectralProfile& p, double s);

/// max over dyadic shells 2^{j-1} <= |k| < 2^j of the shell sums of |k|^s |c_k|.
double besov_norm(const GridField& f, double s);

/// sum_{j >= 1} (j+1)^{s+1} y^j / j!, truncated once a ratio bound
/// certifies the remainder below `tol`.
double f_s_series(double y, double s, double tol = 1e-16);

/// P_s(y) e^y - 1 for integer s >= -1, where P_{-1} = 1 and
/// P_s = (y P_{s-1})' + y P_{s-1}.
double f_s_closed_form(double y, int s);

/// Root of f_s(y) = 1 by bisection, |f_s(y) - 1| < 1e-12.
double critical_threshold(double s);

struct LyapunovReport {
  double s = 0.0;
  double sigma = 0.0;       // 1 - f_s(||h0||_2)
  double h0_norm2 = 0.0;
  double threshold = 0.0;   // min(y_s, y_2)
  bool binding = true;      // smallness condition met
  bool holds = true;        // inequality met on every interval
  double worst_slack = 0.0; // min over intervals of allowance - defect
  std::size_t worst_interval = 0;
  bool norm2_nonincreasing = true;
  bool norm2_strictly_decreasing = true;  // while the norm is above its round-off floor
  std::vector<double> times;
  std::vector<double> norm_s;
  std::vector<double> dissipation;  // ||h||_{s+4} + ||h||_{s+2}
  std::vector<double> norm2;
  std::string note;
};

/// Finite-difference audit of
///   d/dt ||h||_s + sigma (||h||_{s+4} + ||h||_{s+2}) <= 0
/// over consecutive samples, the time integral taken by the trapezoid rule
/// with allowance sigma dt |D_{i+1} - D_i| / 2 plus the round-off floor of
/// each norm (8 eps_mach max|h| sum_k |k|^s). When the smallness
/// condition fails the report is marked non-binding, or PreconditionViolated
/// is thrown if `strict`.
LyapunovReport lyapunov_audit(const std::vector<double>& times, const std::vector<GridField>& snapshots,
                              double s, bool strict = false);

struct DecayReport {
  double s1 = 0.0;
  double s2 = 0.0;
  double exponent = 0.0;  // (s2 - s1) / 2
  double C = 0.0;         // smallest C with ||h(t)||_{s2} <= C (1+t)^{-exponent}
  double initial_norm = 0.0;  // ||h0||_{s2}
  bool finite = true;
  bool envelope_holds = true;
};

DecayReport decay_audit(const std::vector<double>& times, const std::vector<GridField>& snapshots, double s1,
                        double s2);

}  // namespace crystalflow::spectral

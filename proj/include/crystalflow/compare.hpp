#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

/// Cross-scale experiments: ensemble-mean coarse-grained KMC, the mesoscale
/// ODE and the continuum h equation compared on aligned grids.
namespace crystalflow::compare {

/// Meso (beta = 1/2, hop_coef = N^2, dep_coef = 1) against the continuum
/// equation with c1 = c2 = 1, both started from offset-free
/// amplitude * sin(2 pi mode x). The continuum run uses
/// max(pde_grid, N) nodes and is sampled at the meso nodes.
struct MesoPdeOptions {
  std::vector<std::size_t> N{64, 128, 256};
  double amplitude = 0.01;
  int mode = 1;
  std::vector<double> times{1e-5, 2e-5};
  double meso_tol = 1e-12;
  double pde_tol = 1e-13;
  std::size_t pde_grid = 256;
};

struct KmcRung {
  std::size_t N = 16;
  std::size_t M = 4;
  std::size_t n_reps = 50;
};

/// Hop-only KMC (p = 2) against its hydrodynamic limit. In macroscopic
/// variables hbar = h / N^2, tbar = t / N^4 the mean profile follows
/// hbar_t = (1/4) lap exp(-2 beta lap hbar), i.e. the continuum equation for
/// g = 2 beta hbar with c1 = beta / 2, c2 = 0, and the meso system with
/// hop_coef = N^2 / 4, dep_coef = 0.
struct KmcOptions {
  std::vector<KmcRung> ladder{{16, 4, 50}, {64, 8, 100}, {256, 16, 200}};
  double beta = 0.5;
  double amplitude = 0.025;
  int mode = 1;
  double t_macro = 1.4e-6;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct DistancePoint {
  std::string pair;  // "meso-pde", "kmc-pde" or "kmc-meso"
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t n_reps = 0;
  double t = 0.0;
  double l2 = 0.0;
};

struct CompareReport {
  std::vector<DistancePoint> points;
  std::vector<double> meso_pde_orders;  // log2 ratios between successive N at the last time
  bool meso_pde_decreasing = true;
  bool kmc_pde_decreasing = true;
  std::uint64_t kmc_events = 0;
};

/// sqrt(mean((a - b)^2)), optionally after subtracting each profile's mean.
/// Throws GridMismatch on length mismatch.
double aligned_distance(std::span<const double> a, std::span<const double> b, bool mean_shift);

CompareReport meso_vs_pde(const MesoPdeOptions& opt);
CompareReport kmc_vs_pde(const KmcOptions& opt);
CompareReport compare_scales(const MesoPdeOptions& meso, const KmcOptions& kmc);

}  // namespace crystalflow::compare

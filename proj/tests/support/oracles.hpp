#pragma once

// Independent reference computations and random generators shared by the
// unit and acceptance suites. Nothing here calls into the library's
// numerical kernels.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "crystalflow/rng.hpp"

namespace testing {

constexpr double kPi = std::numbers::pi;

/// Hand-rolled value generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed, 0xC0FFEE) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  /// Real trigonometric polynomial with modes 1..kmax and coefficients in [-amp, amp].
  std::vector<double> band_limited(std::size_t n, int kmax, double amp, double offset = 0.0) {
    std::vector<double> a(kmax + 1), b(kmax + 1);
    for (int k = 1; k <= kmax; ++k) {
      a[k] = uniform(-amp, amp);
      b[k] = uniform(-amp, amp);
    }
    std::vector<double> f(n, offset);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = static_cast<double>(j) / static_cast<double>(n);
      for (int k = 1; k <= kmax; ++k) f[j] += a[k] * std::cos(2 * kPi * k * x) + b[k] * std::sin(2 * kPi * k * x);
    }
    return f;
  }

 private:
  crystalflow::CounterRng rng_;
};

/// Naive O(N^2) DFT coefficient c_k = (1/N) sum_j f_j exp(-2 pi i k j / N), returned as (re, im).
inline std::pair<double, double> naive_dft(const std::vector<double>& f, long k) {
  const double n = static_cast<double>(f.size());
  double re = 0.0, im = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double a = -2 * kPi * static_cast<double>(k) * static_cast<double>(j) / n;
    re += f[j] * std::cos(a);
    im += f[j] * std::sin(a);
  }
  return {re / n, im / n};
}

/// Fourth-order central difference of order 1, 2 or 4 on a periodic grid of spacing dx.
inline std::vector<double> fd_derivative(const std::vector<double>& f, int order, double dx) {
  const std::size_t n = f.size();
  auto at = [&](long j) { return f[static_cast<std::size_t>(((j % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n))]; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long j = static_cast<long>(i);
    if (order == 1) {
      out[i] = (-at(j + 2) + 8 * at(j + 1) - 8 * at(j - 1) + at(j - 2)) / (12 * dx);
    } else if (order == 2) {
      out[i] = (-at(j + 2) + 16 * at(j + 1) - 30 * at(j) + 16 * at(j - 1) - at(j - 2)) / (12 * dx * dx);
    } else {
      out[i] = (-at(j + 3) + 12 * at(j + 2) - 39 * at(j + 1) + 56 * at(j) - 39 * at(j - 1) + 12 * at(j - 2) - at(j - 3)) /
               (6 * dx * dx * dx * dx);
    }
  }
  return out;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Mean and batch-means standard error (for correlated samples).
inline MeanSe batch_means(const std::vector<double>& x, std::size_t batches = 50) {
  MeanSe r;
  const std::size_t per = x.size() / batches;
  std::vector<double> bm(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < per; ++i) bm[b] += x[b * per + i];
    bm[b] /= static_cast<double>(per);
  }
  for (double v : bm) r.mean += v;
  r.mean /= static_cast<double>(batches);
  double ss = 0.0;
  for (double v : bm) ss += (v - r.mean) * (v - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  return r;
}

/// Independent-sample mean and standard error.
inline MeanSe mean_se(const std::vector<double>& x) {
  MeanSe r;
  for (double v : x) r.mean += v;
  r.mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - r.mean) * (v - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return r;
}

/// Exact equilibrium law of a 4-column hop-only surface with fixed mass m and
/// zero screw shift: weight exp(-beta sum_i |z_i|^p) over slope vectors
/// (z1, z2, z3, -(z1+z2+z3)) reachable under the mass constraint
/// m = 4 h0 + 3 z1 + 2 z2 + z3. Returns E[g(z1, z2, z3)].
inline double gibbs4_expectation(double beta, int p, std::int64_t mass,
                                 const std::function<double(int, int, int)>& g, int zmax = 14) {
  auto v = [p](int z) { return p == 1 ? std::abs(z) : z * z; };
  double num = 0.0, den = 0.0;
  for (int z1 = -zmax; z1 <= zmax; ++z1)
    for (int z2 = -zmax; z2 <= zmax; ++z2)
      for (int z3 = -zmax; z3 <= zmax; ++z3) {
        const std::int64_t rest = mass - 3 * z1 - 2 * z2 - z3;
        if (((rest % 4) + 4) % 4 != 0) continue;
        const double w = std::exp(-beta * (v(z1) + v(z2) + v(z3) + v(-(z1 + z2 + z3))));
        num += w * g(z1, z2, z3);
        den += w;
      }
  return num / den;
}

/// Brute-force log Z for the tilted slope ensemble, summing |z| <= zmax.
inline double brute_log_z(double beta, int p, double eta, int zmax = 400) {
  double best = -1e300;
  for (int z = -zmax; z <= zmax; ++z) best = std::max(best, -beta * std::pow(std::abs(z), p) + eta * z);
  double s = 0.0;
  for (int z = -zmax; z <= zmax; ++z) s += std::exp(-beta * std::pow(std::abs(z), p) + eta * z - best);
  return best + std::log(s);
}

}  // namespace testing

#include "crystalflow/statmech.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crystalflow/errors.hpp"

namespace crystalflow::statmech {
namespace {

constexpr double kTailTol = 1e-14;
constexpr int kMaxTerms = 1 << 24;

struct Moments {
  double log_z;
  double mean;
  double var;
};

double exponent(double z, const TiltedEnsemble& e) {
  const double a = std::abs(z);
  return -e.beta * (e.p == 1 ? a : a * a) + e.eta * z;
}

// Sums exp(g(z) - g(c)) outward from the dominant integer c in one
// direction. Accumulates weights and first/second moments about c.
void sum_direction(const TiltedEnsemble& e, double c, double gc, int dir, double& s0, double& s1,
                   double& s2) {
  double prev_w = 1.0;
  for (int k = 1; k < kMaxTerms; ++k) {
    const double z = c + dir * k;
    const double w = std::exp(exponent(z, e) - gc);
    const double d = dir * k;
    s0 += w;
    s1 += d * w;
    s2 += d * d * w;
    // Ratio of successive terms is nonincreasing along the direction once
    // past the maximum, so the remaining tail is bounded geometrically.
    const double next = std::exp(exponent(z + dir, e) - gc);
    const double r = w > 0.0 ? next / w : 0.0;
    if (k >= e.z_max && w <= prev_w && r < 1.0) {
      const double tail = w * r / (1.0 - r) * static_cast<double>(k + 2) * static_cast<double>(k + 2);
      if (tail < kTailTol * s0) return;
    }
    prev_w = w;
  }
  throw Divergent("partition sum did not converge");
}

// p = 1: two geometric series in a = e^{eta - beta} and b = e^{-eta - beta}.
Moments moments_linear(const TiltedEnsemble& e) {
  const double a = std::exp(e.eta - e.beta), b = std::exp(-e.eta - e.beta);
  const double ca = -std::expm1(e.eta - e.beta), cb = -std::expm1(-e.eta - e.beta);  // 1 - a, 1 - b
  const double z = 1.0 + a / ca + b / cb;
  const double m1 = (a / (ca * ca) - b / (cb * cb)) / z;
  const double m2 = (a * (1.0 + a) / (ca * ca * ca) + b * (1.0 + b) / (cb * cb * cb)) / z;
  return {std::log(z), m1, std::max(0.0, m2 - m1 * m1)};
}

Moments moments(const TiltedEnsemble& e) {
  e.validate();
  if (e.p == 1) return moments_linear(e);
  double c = 0.0;
  if (e.p == 2) c = std::nearbyint(e.eta / (2.0 * e.beta));
  const double gc = exponent(c, e);
  double s0 = 1.0, s1 = 0.0, s2 = 0.0;
  double p0 = 0.0, p1 = 0.0, p2 = 0.0;
  double n0 = 0.0, n1 = 0.0, n2 = 0.0;
  sum_direction(e, c, gc, +1, p0, p1, p2);
  sum_direction(e, c, gc, -1, n0, n1, n2);
  s0 += p0 + n0;
  s1 += p1 + n1;
  s2 += p2 + n2;
  const double m1 = s1 / s0;  // mean offset from c
  Moments m;
  m.log_z = gc + std::log(s0);
  m.mean = c + m1;
  m.var = std::max(0.0, s2 / s0 - m1 * m1);
  return m;
}

}  // namespace

void TiltedEnsemble::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigInvalid("TiltedEnsemble: beta must be > 0");
  if (p != 1 && p != 2) throw ConfigInvalid("TiltedEnsemble: p must be 1 or 2");
  if (!std::isfinite(eta)) throw ConfigInvalid("TiltedEnsemble: eta must be finite");
  if (z_max < 8) throw ConfigInvalid("TiltedEnsemble: z_max must be >= 8");
  if (p == 1 && std::abs(eta) >= beta)
    throw Divergent("TiltedEnsemble: Z_eta diverges for p = 1 when |eta| >= beta");
}

double log_partition_function(const TiltedEnsemble& ens) { return moments(ens).log_z; }
double partition_function(const TiltedEnsemble& ens) { return std::exp(moments(ens).log_z); }
double tilt_mean(const TiltedEnsemble& ens) { return moments(ens).mean; }
double tilt_variance(const TiltedEnsemble& ens) { return moments(ens).var; }

Tension surface_tension(double u, double beta, int p) {
  if (!std::isfinite(u)) throw OutOfRange("surface_tension: u must be finite");
  TiltedEnsemble ens{beta, 0.0, p, 8};
  auto f = [&](double eta) {
    ens.eta = eta;
    return tilt_mean(ens) - u;
  };

  double lo, hi;
  if (p == 2) {
    const double guess = 2.0 * beta * u;
    double width = 1.0 + beta;
    lo = guess - width;
    hi = guess + width;
    int tries = 0;
    while (f(lo) > 0.0 || f(hi) < 0.0) {
      width *= 2.0;
      lo = guess - width;
      hi = guess + width;
      if (++tries > 60) throw OutOfRange("surface_tension: could not bracket u = " + std::to_string(u));
    }
  } else {
    const double edge = beta * (1.0 - 1e-12);
    lo = -edge;
    hi = edge;
    if (f(lo) > 0.0 || f(hi) < 0.0)
      throw OutOfRange("surface_tension: slope " + std::to_string(u) + " not attainable for p = 1");
  }

  double flo = f(lo), fhi = f(hi);
  double eta = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    if (flo == 0.0) { eta = lo; break; }
    if (fhi == 0.0) { eta = hi; break; }
    const double tol = std::max(1e-12, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(eta));
    // Secant on the bracket; fall back to bisection if it leaves the
    // inner part of the interval.
    double cand = lo - flo * (hi - lo) / (fhi - flo);
    const double margin = 0.05 * (hi - lo);
    if (!(cand > lo + margin && cand < hi - margin)) cand = 0.5 * (lo + hi);
    const double fc = f(cand);
    eta = cand;
    if (fc == 0.0) break;
    if (fc < 0.0) { lo = cand; flo = fc; }
    else { hi = cand; fhi = fc; }
    if (hi - lo < tol) {
      eta = std::abs(flo) < std::abs(fhi) ? lo : hi;
      break;
    }
  }
  ens.eta = eta;
  const double log_z = log_partition_function(ens);
  return {eta * u - log_z, eta};
}

double scaled_tension_limit(double u, double beta, double kappa) {
  if (!(kappa >= 1.0)) throw ConfigInvalid("scaled_tension_limit: kappa must be >= 1");
  return surface_tension(kappa * u, beta, 2).eta_star / kappa;
}

GridField chemical_potential(const GridField& h) {
  const std::size_t n = h.size();
  if (n < 3) throw ConfigInvalid("chemical_potential: need at least 3 points");
  const double inv = 1.0 / (h.spacing * h.spacing);
  GridField mu(std::vector<double>(n), h.spacing);
  for (std::size_t k = 0; k < n; ++k) {
    const double left = h[(k + n - 1) % n];
    const double right = h[(k + 1) % n];
    mu[k] = -2.0 * (right - 2.0 * h[k] + left) * inv;
  }
  return mu;
}

}  // namespace crystalflow::statmech

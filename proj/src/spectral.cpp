#include "crystalflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "crystalflow/errors.hpp"
#include "crystalflow/fourier.hpp"

namespace crystalflow::spectral {
namespace {

void require_order(double s) {
  if (!(s > -1.0) || !std::isfinite(s)) throw ConfigInvalid("spectral: s must be > -1");
}

double weight(std::size_t k, double s) { return std::pow(static_cast<double>(k), s); }

// |c_k| for k = 1..N/2 together with the multiplicity of each |k|.
struct HalfMagnitudes {
  std::vector<double> mag;  // index k
  std::size_t n = 0;
};

HalfMagnitudes magnitudes(const GridField& f) {
  HalfMagnitudes hm;
  hm.n = f.size();
  const auto c = fourier::forward(f.view());
  hm.mag.resize(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) hm.mag[k] = std::abs(c[k]);
  return hm;
}

double multiplicity(std::size_t k, std::size_t n) { return 2 * k == n ? 1.0 : 2.0; }

double series_ratio(std::size_t j, double y, double s) {
  const double jj = static_cast<double>(j);
  return std::pow((jj + 2.0) / (jj + 1.0), s + 1.0) * y / (jj + 1.0);
}

// Bound on the part of s_norm(h) that round-off alone can produce:
// a perturbation of size eps_mach * max|h| in every coefficient.
double roundoff_floor(const GridField& h, double s) {
  double scale = 0.0;
  for (double v : h.values) scale = std::max(scale, std::abs(v));
  double weights = 0.0;
  for (std::size_t k = 1; k <= h.size() / 2; ++k) weights += 2.0 * weight(k, s);
  return 8.0 * std::numeric_limits<double>::epsilon() * scale * weights;
}

}  // namespace

SpectralProfile SpectralProfile::from_field(const GridField& f) {
  const std::size_t n = f.size();
  const auto half = fourier::forward(f.view());
  SpectralProfile p;
  p.coeffs.resize(n);
  const long h = static_cast<long>(n / 2);
  for (long k = -h; k < h; ++k) {
    const std::size_t a = static_cast<std::size_t>(std::labs(k));
    p.coeffs[static_cast<std::size_t>(k + h)] = k >= 0 ? half[a] : std::conj(half[a]);
  }
  return p;
}

std::complex<double> SpectralProfile::at(long k) const {
  const long h = static_cast<long>(coeffs.size() / 2);
  if (k < -h || k >= h) return 0.0;
  return coeffs[static_cast<std::size_t>(k + h)];
}

double SpectralProfile::conjugate_asymmetry() const {
  const long h = static_cast<long>(coeffs.size() / 2);
  double worst = 0.0;
  for (long k = 1; k < h; ++k) worst = std::max(worst, std::abs(at(k) - std::conj(at(-k))));
  return worst;
}

double s_norm(const GridField& f, double s) {
  require_order(s);
  const auto hm = magnitudes(f);
  double acc = 0.0;
  for (std::size_t k = 1; k < hm.mag.size(); ++k) acc += multiplicity(k, hm.n) * weight(k, s) * hm.mag[k];
  return acc;
}

double s_norm(const SpectralProfile& p, double s) {
  require_order(s);
  const long h = static_cast<long>(p.size() / 2);
  double acc = 0.0;
  for (long k = -h; k < h; ++k)
    if (k != 0) acc += std::pow(static_cast<double>(std::labs(k)), s) * std::abs(p.at(k));
  return acc;
}

double besov_norm(const GridField& f, double s) {
  require_order(s);
  const auto hm = magnitudes(f);
  double best = 0.0;
  for (std::size_t lo = 1; lo < hm.mag.size(); lo *= 2) {
    double shell = 0.0;
    for (std::size_t k = lo; k < std::min(2 * lo, hm.mag.size()); ++k)
      shell += multiplicity(k, hm.n) * weight(k, s) * hm.mag[k];
    best = std::max(best, shell);
  }
  return best;
}

double f_s_series(double y, double s, double tol) {
  if (!std::isfinite(y) || y < 0.0) throw ConfigInvalid("f_s_series: y must be finite and >= 0");
  if (!(s >= -1.0)) throw ConfigInvalid("f_s_series: s must be >= -1");
  if (!(tol > 0.0)) throw ConfigInvalid("f_s_series: tol must be > 0");
  if (y == 0.0) return 0.0;
  double term = std::pow(2.0, s + 1.0) * y;  // j = 1
  double sum = term;
  for (std::size_t j = 1; j < 100000; ++j) {
    // Successive ratios decrease once j + 1 > y, so the current ratio bounds the tail.
    const double r = series_ratio(j, y, s);
    if (r < 1.0 && static_cast<double>(j) + 1.0 > y) {
      const double tail = term * r / (1.0 - r);
      if (tail < tol || tail < std::numeric_limits<double>::epsilon() * sum * 1e-2) return sum;
    }
    term *= r;
    sum += term;
  }
  throw Divergent("f_s_series: no convergence");
}

double f_s_closed_form(double y, int s) {
  if (s < -1) throw ConfigInvalid("f_s_closed_form: s must be >= -1");
  // Coefficients of P in increasing powers.
  std::vector<double> p{1.0};
  for (int order = 0; order <= s; ++order) {
    std::vector<double> yp(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) yp[i + 1] = p[i];
    std::vector<double> next(yp.size(), 0.0);
    for (std::size_t i = 1; i < yp.size(); ++i) next[i - 1] += static_cast<double>(i) * yp[i];
    for (std::size_t i = 0; i < yp.size(); ++i) next[i] += yp[i];
    p = std::move(next);
  }
  double poly = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) poly = poly * y + p[i];
  // P e^y - 1 = P (e^y - 1) + (P - 1), accurate near y = 0.
  double p_minus_one = 0.0;
  for (std::size_t i = p.size(); i-- > 1;) p_minus_one = p_minus_one * y + p[i];
  p_minus_one *= y;
  p_minus_one += p[0] - 1.0;
  return poly * std::expm1(y) + p_minus_one;
}

double critical_threshold(double s) {
  if (!(s >= -1.0) || !std::isfinite(s)) throw ConfigInvalid("critical_threshold: s must be >= -1");
  double lo = 0.0, hi = 1.0;
  while (f_s_series(hi, s) < 1.0) {
    lo = hi;
    hi *= 2.0;
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double v = f_s_series(mid, s) - 1.0;
    if (std::abs(v) < 1e-13 || hi - lo < 1e-16) break;
    (v < 0.0 ? lo : hi) = mid;
  }
  return mid;
}

LyapunovReport lyapunov_audit(const std::vector<double>& times, const std::vector<GridField>& snapshots,
                              double s, bool strict) {
  require_order(s);
  if (times.size() != snapshots.size() || times.empty())
    throw ConfigInvalid("lyapunov_audit: times and snapshots must be nonempty and aligned");
  LyapunovReport r;
  r.s = s;
  r.times = times;
  r.h0_norm2 = s_norm(snapshots.front(), 2.0);
  r.threshold = std::min(critical_threshold(s), critical_threshold(2.0));
  r.binding = r.h0_norm2 < r.threshold;
  if (!r.binding) {
    std::ostringstream os;
    os << "smallness condition fails: ||h0||_2 = " << r.h0_norm2 << " >= " << r.threshold;
    r.note = os.str();
    if (strict) throw PreconditionViolated("lyapunov_audit: " + r.note);
  }
  r.sigma = 1.0 - f_s_series(r.h0_norm2, s);

  for (const auto& h : snapshots) {
    r.norm_s.push_back(s_norm(h, s));
    r.dissipation.push_back(s_norm(h, s + 4.0) + s_norm(h, s + 2.0));
    r.norm2.push_back(s_norm(h, 2.0));
  }
  std::vector<double> floor_s, floor_d, floor_2;
  for (const auto& h : snapshots) {
    floor_s.push_back(roundoff_floor(h, s));
    floor_d.push_back(roundoff_floor(h, s + 4.0) + roundoff_floor(h, s + 2.0));
    floor_2.push_back(roundoff_floor(h, 2.0));
  }
  r.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double dt = times[i + 1] - times[i];
    const double d0 = r.dissipation[i], d1 = r.dissipation[i + 1];
    const double defect = r.norm_s[i + 1] - r.norm_s[i] + r.sigma * dt * 0.5 * (d0 + d1);
    const double noise = floor_s[i] + floor_s[i + 1] + std::abs(r.sigma) * dt * 0.5 * (floor_d[i] + floor_d[i + 1]);
    const double allowance = std::abs(r.sigma) * dt * 0.5 * std::abs(d1 - d0) + noise;
    const double slack = allowance - defect;
    if (slack < r.worst_slack) {
      r.worst_slack = slack;
      r.worst_interval = i;
    }
    if (r.norm2[i + 1] > r.norm2[i] + floor_2[i] + floor_2[i + 1]) r.norm2_nonincreasing = false;
    if (r.norm2[i] > floor_2[i] && !(r.norm2[i + 1] < r.norm2[i])) r.norm2_strictly_decreasing = false;
  }
  if (!std::isfinite(r.worst_slack)) r.worst_slack = 0.0;
  r.holds = r.worst_slack >= 0.0;
  return r;
}

DecayReport decay_audit(const std::vector<double>& times, const std::vector<GridField>& snapshots, double s1,
                        double s2) {
  require_order(s1);
  require_order(s2);
  if (s2 < s1) throw ConfigInvalid("decay_audit: need s2 >= s1");
  if (times.size() != snapshots.size() || times.empty())
    throw ConfigInvalid("decay_audit: times and snapshots must be nonempty and aligned");
  DecayReport r;
  r.s1 = s1;
  r.s2 = s2;
  r.exponent = 0.5 * (s2 - s1);
  r.initial_norm = s_norm(snapshots.front(), s2);
  if (!std::isfinite(s_norm(snapshots.front(), s1)) || !std::isfinite(r.initial_norm))
    throw PreconditionViolated("decay_audit: initial norms must be finite");
  std::vector<double> norms;
  for (std::size_t i = 0; i < times.size(); ++i) {
    norms.push_back(s_norm(snapshots[i], s2));
    r.C = std::max(r.C, norms.back() * std::pow(1.0 + times[i], r.exponent));
  }
  r.finite = std::isfinite(r.C);
  for (std::size_t i = 0; i < times.size(); ++i)
    if (norms[i] > r.C * std::pow(1.0 + times[i], -r.exponent) * (1.0 + 1e-12)) r.envelope_holds = false;
  return r;
}

}  // namespace crystalflow::spectral

#include "crystalflow/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crystalflow/errors.hpp"
#include "crystalflow/fourier.hpp"

namespace crystalflow {

void RegParams::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigInvalid("RegParams: epsilon must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigInvalid("RegParams: alpha must lie in (0, 1)");
}

namespace functionals {
namespace {

void require_positive(const GridField& u, const char* who) {
  for (double v : u.values)
    if (!(v > 0.0)) throw NonPositiveState(std::string(who) + ": u must be positive");
}

}  // namespace

std::string_view to_string(Kind kind) noexcept {
  switch (kind) {
    case Kind::F: return "F";
    case Kind::E: return "E";
    case Kind::F_eps: return "F_eps";
    case Kind::LogInvariant: return "log_invariant";
  }
  return "?";
}

double functional_F(const GridField& u) { return u.mean(); }

double functional_E(const GridField& u) {
  if (u.size() == 0) return 0.0;
  // Parseval: mean(u_xx^2 + u_x^2) = sum_k |c_k|^2 (w^4 + w^2).
  const auto c = fourier::forward(u.view());
  const std::size_t n = u.size();
  double acc = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double w = 2.0 * M_PI * static_cast<double>(k);
    const double weight = (2 * k == n) ? 1.0 : 2.0;
    acc += weight * std::norm(c[k]) * (w * w * w * w + w * w);
  }
  return acc;
}

double functional_F_eps(const GridField& u, const RegParams& reg) {
  reg.validate();
  require_positive(u, "functional_F_eps");
  const double scale = std::pow(reg.epsilon, reg.alpha) / (1.0 - reg.alpha);
  double acc = 0.0;
  for (double v : u.values) acc += scale * std::pow(v, 1.0 - reg.alpha) + v;
  return acc / static_cast<double>(u.size());
}

double log_invariant(const GridField& u, const RegParams& reg) {
  reg.validate();
  require_positive(u, "log_invariant");
  const double scale = std::pow(reg.epsilon, reg.alpha) / reg.alpha;
  double acc = 0.0;
  for (double v : u.values) acc += scale * std::pow(v, -reg.alpha) - std::log(v);
  return acc / static_cast<double>(u.size());
}

MinLemmaResult min_lemma_check(const GridField& u) {
  MinLemmaResult r;
  const std::size_t n = u.size();
  if (n == 0) return r;
  r.argmin = static_cast<std::size_t>(std::min_element(u.values.begin(), u.values.end()) - u.values.begin());
  const double umin = u[r.argmin];
  const auto uxx = fourier::derivative(u.view(), 2);
  double sq = 0.0;
  for (double v : uxx) sq += v * v;
  const double norm = std::sqrt(sq / static_cast<double>(n));
  r.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == r.argmin) continue;
    const std::size_t gap = j > r.argmin ? j - r.argmin : r.argmin - j;
    const double dist = static_cast<double>(std::min(gap, n - gap)) / static_cast<double>(n);
    const double bound = (2.0 / 3.0) * norm * std::pow(dist, 1.5);
    const double slack = bound - (u[j] - umin);
    r.worst_slack = std::min(r.worst_slack, slack);
  }
  if (!std::isfinite(r.worst_slack)) r.worst_slack = 0.0;
  r.holds = r.worst_slack >= 0.0;
  return r;
}

}  // namespace functionals
}  // namespace crystalflow

#pragma once

#include <string_view>

#include "crystalflow/grid.hpp"

/// Integral functionals on the unit torus. Integrals are grid means
/// (domain length 1); derivatives are spectral.
namespace crystalflow {

struct RegParams {
  double epsilon = 1e-3;
  double alpha = 0.5;  // strictly inside (0, 1)

  void validate() const;
};

namespace functionals {

enum class Kind { F, E, F_eps, LogInvariant };
std::string_view to_string(Kind kind) noexcept;

struct FunctionalValue {
  Kind name;
  double value;
  double t;
};

/// Integral of u.
double functional_F(const GridField& u);
/// Integral of u_xx^2 + u_x^2.
double functional_E(const GridField& u);
/// Integral of eps^a/(1-a) u^(1-a) + u. Throws NonPositiveState if any u <= 0.
double functional_F_eps(const GridField& u, const RegParams& reg);
/// Integral of (eps^a/a) u^(-a) - ln u. Throws NonPositiveState if any u <= 0.
double log_invariant(const GridField& u, const RegParams& reg);

struct MinLemmaResult {
  bool holds = true;
  double worst_slack = 0.0;  // min over nodes of rhs - lhs (x* excluded)
  std::size_t argmin = 0;
};

/// Checks u(x) - u_min <= (2/3) ||u_xx||_L2 |x - x*|^{3/2} at every node,
/// x* = grid argmin, |.| the periodic distance.
MinLemmaResult min_lemma_check(const GridField& u);

}  // namespace functionals
}  // namespace crystalflow

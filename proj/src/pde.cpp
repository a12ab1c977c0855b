#include "crystalflow/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "crystalflow/errors.hpp"
#include "crystalflow/fourier.hpp"

namespace crystalflow::pde {
namespace {

constexpr double kExpGuard = 700.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = std::abs(a[j] - b[j]);
    if (!(d <= m)) m = std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
  }
  return m;
}

double biharmonic_minus_laplace(double w) { return w * w * w * w + w * w; }

std::vector<double> mobility(const GridField& u, const RegParams& reg) {
  const double ea = std::pow(reg.epsilon, reg.alpha);
  std::vector<double> m(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double ua = std::pow(u[j], reg.alpha);
    m[j] = u[j] * (ua / (ua + ea));
  }
  return m;
}

void require_positive(const GridField& u, const char* who) {
  for (double v : u.values)
    if (!(v > 0.0)) throw NonPositiveState(std::string(who) + ": state lost positivity");
}

std::vector<double> checked_neg_laplacian(const GridField& h, const char* who) {
  auto lap = fourier::laplacian(h.view());
  for (auto& v : lap) {
    v = -v;
    if (v > kExpGuard) throw Overflow(std::string(who) + ": -lap h exceeds the exponential range");
  }
  return lap;
}

using StepFn = std::function<GridField(const GridField&, double)>;
using AcceptFn = std::function<void(double t, double dt, const GridField& next)>;
using SampleFn = std::function<void(double t, const GridField& state)>;

struct DriveStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

std::vector<double> sample_schedule(double t_final, const TimeControl& c) {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigInvalid("t_final must be positive and finite");
  std::vector<double> s;
  double last = 0.0;
  for (double t : c.sample_times) {
    if (!(t > last) || t > t_final) throw ConfigInvalid("sample_times must increase within (0, t_final]");
    s.push_back(t);
    last = t;
  }
  if (s.empty() || s.back() < t_final) s.push_back(t_final);
  return s;
}

// Marches `y` through every sample time. A step of size dt is compared with
// two of size dt/2; the max-norm defect drives a PI controller for a method
// whose local error scales as dt^2.
DriveStats drive(GridField& y, double t_final, const TimeControl& c, const StepFn& step,
                 const AcceptFn& on_accept, const SampleFn& on_sample,
                 const std::function<void(const GridField&)>& validate_state = {}) {
  const auto samples = sample_schedule(t_final, c);
  const double floor = 1e-12 * t_final;
  const bool fixed = c.fixed_dt > 0.0;
  if (!fixed && !(c.tol > 0.0)) throw ConfigInvalid("TimeControl: tol must be > 0");
  double dt = fixed ? c.fixed_dt : (c.dt_initial > 0.0 ? c.dt_initial : 1e-6 * t_final);
  double err_prev = 1.0;
  double t = 0.0;
  DriveStats stats;
  on_sample(0.0, y);

  std::size_t idx = 0;
  while (idx < samples.size()) {
    const double target = samples[idx];
    const double remaining = target - t;
    const bool lands = dt >= remaining * (1.0 - 1e-12);
    const double h = lands ? remaining : dt;
    if (h < floor && !lands) throw StiffnessAbort("time step fell below 1e-12 * t_final at t = " + std::to_string(t));
    if (++stats.steps + stats.rejected > c.max_steps) throw StiffnessAbort("step budget exhausted");

    GridField next;
    double fac = 1.0;
    try {
      if (fixed) {
        next = step(y, h);
      } else {
        const GridField big = step(y, h);
        const GridField half = step(y, 0.5 * h);
        next = step(half, 0.5 * h);
        const double scale = c.tol * std::max(1.0, max_abs(next.view()));
        const double err = max_abs_diff(next, big) / scale;
        if (!(err <= 1.0)) {
          --stats.steps;
          ++stats.rejected;
          dt = h * (std::isfinite(err) ? std::max(0.2, 0.9 / std::sqrt(err)) : 0.25);
          if (dt < floor) throw StiffnessAbort("time step fell below 1e-12 * t_final at t = " + std::to_string(t));
          continue;
        }
        if (c.extrapolate) {
          // Local Richardson extrapolation: second order, same defect estimate.
          for (std::size_t j = 0; j < next.size(); ++j) next[j] = 2.0 * next[j] - big[j];
          if (validate_state) validate_state(next);
        }
        const double e = std::max(err, 1e-10);
        fac = 0.9 * std::pow(e, -0.35) * std::pow(std::max(err_prev, 1e-10), 0.2);
        fac = std::clamp(fac, 0.2, 5.0);
        err_prev = e;
      }
    } catch (const NonPositiveState&) {
      --stats.steps;
      ++stats.rejected;
      dt = 0.25 * h;
      if (dt < floor) throw StiffnessAbort("positivity could not be kept above the step floor at t = " + std::to_string(t));
      continue;
    }

    t = lands ? target : t + h;
    on_accept(t, h, next);
    y = std::move(next);
    if (lands) {
      on_sample(t, y);
      ++idx;
    }
    if (fixed) {
      dt = c.fixed_dt;
    } else {
      const double proposed = h * fac;
      dt = (lands && h < dt) ? std::min(dt, std::max(proposed, h)) : proposed;
      if (c.dt_max > 0.0) dt = std::min(dt, c.dt_max);
    }
  }
  return stats;
}

}  // namespace

GridField u_from_h(const GridField& h) {
  if (!h.all_finite()) throw ConfigInvalid("u_from_h: h must be finite");
  auto v = checked_neg_laplacian(h, "u_from_h");
  for (auto& x : v) x = std::exp(x);
  return GridField(std::move(v), h.spacing);
}

GridField regularized_rhs(const GridField& u, const RegParams& reg) {
  reg.validate();
  require_positive(u, "regularized_rhs");
  const auto m = mobility(u, reg);
  auto lu = fourier::apply_symbol(u.view(), biharmonic_minus_laplace);
  for (std::size_t j = 0; j < lu.size(); ++j) lu[j] = -m[j] * lu[j];
  return GridField(std::move(lu), u.spacing);
}

GridField step_pde(const GridField& u, double dt, const RegParams& reg) {
  if (!(dt > 0.0)) throw ConfigInvalid("step_pde: dt must be > 0");
  require_positive(u, "step_pde");
  const auto m = mobility(u, reg);
  const double mbar = *std::max_element(m.begin(), m.end());
  const auto lu = fourier::apply_symbol(u.view(), biharmonic_minus_laplace);
  std::vector<double> rhs(u.size());
  for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] = u[j] - dt * (m[j] - mbar) * lu[j];
  auto next = fourier::apply_symbol(rhs, [&](double w) { return 1.0 / (1.0 + dt * mbar * biharmonic_minus_laplace(w)); });
  GridField out(std::move(next), u.spacing);
  if (!out.all_finite()) throw NonPositiveState("step_pde: non-finite state");
  require_positive(out, "step_pde");
  return out;
}

PdeRun solve_pde(const GridField& u0, const RegParams& reg, double t_final, const TimeControl& control) {
  reg.validate();
  require_torus_grid(u0, "solve_pde");
  for (double v : u0.values)
    if (v < 0.0) throw ConfigInvalid("solve_pde: u0 must be nonnegative");

  GridField u = u0;
  for (auto& v : u.values) v += reg.epsilon;

  PdeRun run;
  auto& rep = run.report;
  double e_prev = functionals::functional_E(u);
  double e_int = 0.0;
  rep.global_min_u = u.min();

  auto on_sample = [&](double t, const GridField& s) {
    rep.times.push_back(t);
    rep.min_u.push_back(s.min());
    rep.F.push_back(functionals::functional_F(s));
    rep.E.push_back(t == 0.0 ? e_prev : functionals::functional_E(s));
    rep.F_eps.push_back(functionals::functional_F_eps(s, reg));
    rep.log_invariant.push_back(functionals::log_invariant(s, reg));
    rep.E_integral.push_back(e_int);
    run.snapshots.push_back(s);
  };
  auto on_accept = [&](double, double dt, const GridField& next) {
    const double e = functionals::functional_E(next);
    e_int += 0.5 * dt * (e + e_prev);
    rep.worst_E_increase = std::max(rep.worst_E_increase, e - e_prev);
    rep.global_min_u = std::min(rep.global_min_u, next.min());
    e_prev = e;
  };
  auto step = [&](const GridField& s, double dt) { return step_pde(s, dt, reg); };

  auto positive = [](const GridField& s) { require_positive(s, "solve_pde"); };
  const auto stats = drive(u, t_final, control, step, on_accept, on_sample, positive);
  rep.steps = stats.steps;
  rep.rejected = stats.rejected;
  return run;
}

GridField step_h(const GridField& h, double dt, const HCoefficients& coef) {
  if (!(dt > 0.0)) throw ConfigInvalid("step_h: dt must be > 0");
  const std::size_t n = h.size();
  const auto neg_lap = checked_neg_laplacian(h, "step_h");

  // exp(-lap h) - 1 keeps full relative precision for small data.
  std::vector<double> em(n);
  double mob = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    em[j] = std::expm1(neg_lap[j]);
    mob = std::max(mob, 1.0 + em[j]);
  }
  const auto lap_em = fourier::laplacian(em);
  std::vector<double> nonlinear(n);
  for (std::size_t j = 0; j < n; ++j) nonlinear[j] = coef.c1 * lap_em[j] - coef.c2 * em[j];

  auto hk = fourier::forward(h.view());
  const auto nk = fourier::forward(nonlinear);
  for (std::size_t k = 0; k < hk.size(); ++k) {
    const double w = kTwoPi * static_cast<double>(k);
    const double lin = -mob * (coef.c1 * w * w * w * w + coef.c2 * w * w);
    const double z = lin * dt;
    const double phi1 = z == 0.0 ? 1.0 : std::expm1(z) / z;
    const fourier::Complex remainder = nk[k] - lin * hk[k];
    hk[k] = std::exp(z) * hk[k] + dt * phi1 * remainder;
  }
  GridField out(fourier::inverse(hk, n), h.spacing);
  if (!out.all_finite()) throw Overflow("step_h: non-finite state");
  return out;
}

HTrajectory solve_h_equation(const GridField& h0, double t_final, const TimeControl& control,
                             const HCoefficients& coef) {
  require_torus_grid(h0, "solve_h_equation");
  HTrajectory traj;
  GridField h = h0;
  auto on_sample = [&](double t, const GridField& s) {
    traj.times.push_back(t);
    traj.snapshots.push_back(s);
  };
  auto on_accept = [](double, double, const GridField&) {};
  auto step = [&](const GridField& s, double dt) { return step_h(s, dt, coef); };
  const auto stats = drive(h, t_final, control, step, on_accept, on_sample);
  traj.steps = stats.steps;
  traj.rejected = stats.rejected;
  return traj;
}

}  // namespace crystalflow::pde

#include "crystalflow/meso.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "crystalflow/errors.hpp"
#include "crystalflow/statmech.hpp"

namespace crystalflow::meso {
namespace {

constexpr double kExpGuard = 700.0;

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

std::string_view to_string(LaplacianScaling s) noexcept {
  return s == LaplacianScaling::Grid ? "grid" : "lattice";
}

LaplacianScaling parse_laplacian_scaling(std::string_view s) {
  if (s == "grid") return LaplacianScaling::Grid;
  if (s == "lattice") return LaplacianScaling::Lattice;
  throw ConfigInvalid("laplacian must be \"grid\" or \"lattice\", got \"" + std::string(s) + "\"");
}

void MesoParams::validate() const {
  if (!(hop_coef > 0.0) || !std::isfinite(hop_coef)) throw ConfigInvalid("MesoParams: hop_coef must be > 0");
  if (!(dep_coef >= 0.0) || !std::isfinite(dep_coef)) throw ConfigInvalid("MesoParams: dep_coef must be >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigInvalid("MesoParams: beta must be > 0");
  if (N < 4) throw ConfigInvalid("MesoParams: N must be >= 4");
}

GridField smereka_rhs(const GridField& h, const MesoParams& params) {
  params.validate();
  const std::size_t n = h.size();
  if (n != params.N) throw GridMismatch("smereka_rhs: field length differs from N");
  const double dx = params.laplacian == LaplacianScaling::Grid ? 1.0 / static_cast<double>(n) : 1.0;
  const GridField mu = statmech::chemical_potential(GridField(h.values, dx));
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = params.beta * mu[k];
    if (a > kExpGuard) throw Overflow("smereka_rhs: beta*mu exceeds the exponential range at k = " + std::to_string(k));
    g[k] = std::exp(a);
  }
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double left = g[(k + n - 1) % n];
    const double right = g[(k + 1) % n];
    out[k] = params.hop_coef * (left - 2.0 * g[k] + right) + params.dep_coef * (1.0 - g[k]);
  }
  return GridField(std::move(out), h.spacing);
}

MesoTrajectory integrate_meso(const GridField& h0, const MesoParams& params, double t_final,
                              const MesoControl& control) {
  params.validate();
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigInvalid("integrate_meso: t_final must be > 0");
  if (!(control.tol > 0.0)) throw ConfigInvalid("integrate_meso: tol must be > 0");
  if (!h0.all_finite()) throw ConfigInvalid("integrate_meso: h0 must be finite");
  std::vector<double> samples;
  for (double t : control.sample_times) {
    if (!(t > (samples.empty() ? 0.0 : samples.back())) || t > t_final)
      throw ConfigInvalid("integrate_meso: sample_times must increase within (0, t_final]");
    samples.push_back(t);
  }
  if (samples.empty() || samples.back() < t_final) samples.push_back(t_final);

  const std::size_t n = h0.size();
  const double floor = 1e-14 * t_final;
  auto f = [&](const std::vector<double>& y) { return smereka_rhs(GridField(y, h0.spacing), params).values; };

  MesoTrajectory traj;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(h0);

  std::vector<double> y = h0.values;
  std::vector<double> k1 = f(y), k2, k3, k4, k5, k6, k7;
  std::vector<double> tmp(n), ynew(n);
  double t = 0.0;
  double dt = control.dt_initial > 0.0 ? control.dt_initial : 1e-6 * t_final;
  auto stage = [&](std::initializer_list<std::pair<double, const std::vector<double>*>> terms, double h) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (const auto& [a, k] : terms) acc += a * (*k)[j];
      tmp[j] = y[j] + h * acc;
    }
    return f(tmp);
  };

  std::size_t idx = 0;
  while (idx < samples.size()) {
    const double target = samples[idx];
    const double remaining = target - t;
    const bool lands = dt >= remaining * (1.0 - 1e-12);
    const double h = lands ? remaining : dt;
    if (h < floor && !lands) throw StiffnessAbort("integrate_meso: dt fell below 1e-14 * t_final at t = " + std::to_string(t));
    if (traj.steps + traj.rejected >= control.max_steps) throw StiffnessAbort("integrate_meso: step budget exhausted");

    double err = 0.0, scale = 1.0;
    try {
      k2 = stage({{a21, &k1}}, h);
      k3 = stage({{a31, &k1}, {a32, &k2}}, h);
      k4 = stage({{a41, &k1}, {a42, &k2}, {a43, &k3}}, h);
      k5 = stage({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h);
      k6 = stage({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h);
      for (std::size_t j = 0; j < n; ++j)
        ynew[j] = y[j] + h * (b1 * k1[j] + b3 * k3[j] + b4 * k4[j] + b5 * k5[j] + b6 * k6[j]);
      k7 = f(ynew);
      for (std::size_t j = 0; j < n; ++j) {
        const double e = h * (e1 * k1[j] + e3 * k3[j] + e4 * k4[j] + e5 * k5[j] + e6 * k6[j] + e7 * k7[j]);
        err = std::max(err, std::abs(e));
        scale = std::max(scale, std::abs(ynew[j]));
      }
      err /= control.tol * scale;
    } catch (const Overflow&) {
      // A trial stage left the exponential range: treat as a failed step.
      err = 1e10;
    }
    if (!std::isfinite(err)) err = 1e10;

    const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    if (err > 1.0) {
      ++traj.rejected;
      dt = h * fac;
      if (dt < floor) throw StiffnessAbort("integrate_meso: dt fell below 1e-14 * t_final at t = " + std::to_string(t));
      continue;
    }
    ++traj.steps;
    t = lands ? target : t + h;
    y.swap(ynew);
    k1.swap(k7);
    if (lands) {
      traj.times.push_back(t);
      traj.snapshots.emplace_back(y, h0.spacing);
      ++idx;
    }
    const double proposed = h * fac;
    dt = (lands && h < dt) ? std::min(dt, std::max(proposed, h)) : proposed;
  }
  return traj;
}

}  // namespace crystalflow::meso

#include "crystalflow/compare.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crystalflow/errors.hpp"
#include "crystalflow/grid.hpp"
#include "crystalflow/kmc.hpp"
#include "crystalflow/meso.hpp"
#include "crystalflow/pde.hpp"

namespace crystalflow::compare {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sine(double amplitude, int mode, double x) { return amplitude * std::sin(kTwoPi * mode * x); }

std::vector<double> box_means(std::span<const double> v, std::size_t M) {
  if (M == 0 || v.size() % M != 0) throw GridMismatch("box size does not divide the grid");
  std::vector<double> out(v.size() / M, 0.0);
  for (std::size_t j = 0; j < v.size(); ++j) out[j / M] += v[j];
  for (auto& x : out) x /= static_cast<double>(M);
  return out;
}

void mark_trend(const std::vector<DistancePoint>& pts, const std::string& pair, double t, bool& verdict) {
  double prev = INFINITY;
  for (const auto& p : pts) {
    if (p.pair != pair || p.t != t) continue;
    if (!(p.l2 < prev)) verdict = false;
    prev = p.l2;
  }
}

}  // namespace

double aligned_distance(std::span<const double> a, std::span<const double> b, bool mean_shift) {
  if (a.size() != b.size() || a.empty()) throw GridMismatch("aligned_distance: profiles differ in length");
  double ma = 0.0, mb = 0.0;
  if (mean_shift) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - ma) - (b[i] - mb);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

CompareReport meso_vs_pde(const MesoPdeOptions& opt) {
  if (opt.times.empty()) throw ConfigInvalid("meso_vs_pde: times must be nonempty");
  CompareReport rep;
  const double t_final = opt.times.back();
  for (std::size_t n : opt.N) {
    const std::size_t ng = std::max(opt.pde_grid, n);
    if (!is_power_of_two(n) || ng % n != 0) throw GridMismatch("meso_vs_pde: N must be a power of two dividing the continuum grid");
    const auto h0 = GridField::sample(n, [&](double x) { return sine(opt.amplitude, opt.mode, x); });
    meso::MesoParams mp{static_cast<double>(n) * static_cast<double>(n), 1.0, 0.5, n, meso::LaplacianScaling::Grid};
    meso::MesoControl mc;
    mc.tol = opt.meso_tol;
    mc.sample_times = opt.times;
    const auto mtraj = meso::integrate_meso(h0, mp, t_final, mc);

    const auto g0 = GridField::sample(ng, [&](double x) { return sine(opt.amplitude, opt.mode, x); });
    pde::TimeControl pc;
    pc.tol = opt.pde_tol;
    pc.sample_times = opt.times;
    const auto ptraj = pde::solve_h_equation(g0, t_final, pc);

    const std::size_t stride = ng / n;
    for (std::size_t i = 0; i < opt.times.size(); ++i) {
      std::vector<double> at_nodes(n);
      for (std::size_t k = 0; k < n; ++k) at_nodes[k] = ptraj.snapshots[i + 1][k * stride];
      rep.points.push_back({"meso-pde", n, 1, 1, opt.times[i],
                            aligned_distance(mtraj.snapshots[i + 1].view(), at_nodes, false)});
    }
  }
  mark_trend(rep.points, "meso-pde", t_final, rep.meso_pde_decreasing);
  const DistancePoint* prev = nullptr;
  for (const auto& p : rep.points) {
    if (p.pair != "meso-pde" || p.t != t_final) continue;
    if (prev) rep.meso_pde_orders.push_back(std::log(prev->l2 / p.l2) / std::log(static_cast<double>(p.N) / static_cast<double>(prev->N)));
    prev = &p;
  }
  return rep;
}

CompareReport kmc_vs_pde(const KmcOptions& opt) {
  CompareReport rep;
  for (const auto& rung : opt.ladder) {
    const std::size_t n = rung.N;
    if (!is_power_of_two(n) || n < 16) throw GridMismatch("kmc_vs_pde: N must be a power of two >= 16");
    if (rung.M == 0 || n % rung.M != 0) throw GridMismatch("kmc_vs_pde: M must divide N");
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    const double t_micro = opt.t_macro * n2 * n2;

    auto initial = kmc::MicroState::flat(n);
    for (std::size_t i = 0; i < n; ++i)
      initial.heights[i] = static_cast<std::int64_t>(std::llround(n2 * sine(opt.amplitude, opt.mode, static_cast<double>(i) / n)));
    kmc::KmcParams kp;
    kp.beta = opt.beta;
    kp.p = 2;
    kp.seed = opt.seed;
    kmc::EnsembleOptions eo;
    eo.threads = opt.threads;
    const auto ens = kmc::run_ensemble(initial, kp, t_micro, rung.n_reps, eo);
    rep.kmc_events += ens.total_events;
    std::vector<double> kmc_macro = ens.mean.back();
    for (auto& v : kmc_macro) v /= n2;
    const auto kmc_boxes = box_means(kmc_macro, rung.M);

    // g = 2 beta hbar under c1 = beta/2, c2 = 0.
    const auto g0 = GridField::sample(n, [&](double x) { return 2.0 * opt.beta * sine(opt.amplitude, opt.mode, x); });
    pde::TimeControl pc;
    pc.tol = 1e-12;
    const auto ptraj = pde::solve_h_equation(g0, opt.t_macro, pc, {opt.beta / 2.0, 0.0});
    std::vector<double> pde_macro = ptraj.snapshots.back().values;
    for (auto& v : pde_macro) v /= 2.0 * opt.beta;
    const auto pde_boxes = box_means(pde_macro, rung.M);

    const auto h0 = GridField::sample(n, [&](double x) { return sine(opt.amplitude, opt.mode, x); });
    meso::MesoParams mp{0.25 * n2, 0.0, opt.beta, n, meso::LaplacianScaling::Grid};
    meso::MesoControl mc;
    mc.tol = 1e-12;
    const auto mtraj = meso::integrate_meso(h0, mp, opt.t_macro, mc);
    const auto meso_boxes = box_means(mtraj.snapshots.back().view(), rung.M);

    rep.points.push_back({"kmc-pde", n, rung.M, rung.n_reps, opt.t_macro, aligned_distance(kmc_boxes, pde_boxes, true)});
    rep.points.push_back({"kmc-meso", n, rung.M, rung.n_reps, opt.t_macro, aligned_distance(kmc_boxes, meso_boxes, true)});
  }
  mark_trend(rep.points, "kmc-pde", opt.t_macro, rep.kmc_pde_decreasing);
  return rep;
}

CompareReport compare_scales(const MesoPdeOptions& meso, const KmcOptions& kmc) {
  CompareReport a = meso_vs_pde(meso);
  CompareReport b = kmc_vs_pde(kmc);
  a.points.insert(a.points.end(), b.points.begin(), b.points.end());
  a.kmc_pde_decreasing = b.kmc_pde_decreasing;
  a.kmc_events = b.kmc_events;
  return a;
}

}  // namespace crystalflow::compare

#include "crystalflow/kmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "crystalflow/errors.hpp"

namespace crystalflow::kmc {
namespace {

constexpr int kTable = 256;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void apply_event(MicroState& s, const EventRecord& e) {
  const std::size_t n = s.size();
  auto& h = s.heights;
  switch (e.kind) {
    case EventKind::HopLeft:
      h[e.site] -= 1;
      h[(e.site + n - 1) % n] += 1;
      break;
    case EventKind::HopRight:
      h[e.site] -= 1;
      h[(e.site + 1) % n] += 1;
      break;
    case EventKind::Evaporate:
      h[e.site] -= 1;
      break;
    case EventKind::Deposit:
      h[e.site] += 1;
      break;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// MicroState / KmcParams

MicroState MicroState::flat(std::size_t n, std::int64_t level) {
  MicroState s;
  s.heights.assign(n, level);
  return s;
}

std::int64_t MicroState::screw_shift() const noexcept {
  return slope_offset.num * static_cast<std::int64_t>(size()) / slope_offset.den;
}

std::int64_t MicroState::height(std::int64_t i) const noexcept {
  const auto n = static_cast<std::int64_t>(size());
  const std::int64_t q = floor_div(i, n);
  return heights[static_cast<std::size_t>(i - q * n)] + q * screw_shift();
}

std::int64_t MicroState::mass() const noexcept {
  std::int64_t m = 0;
  for (auto v : heights) m += v;
  return m;
}

void MicroState::validate() const {
  if (size() < 4) throw ConfigInvalid("MicroState: need N >= 4 columns");
  if (slope_offset.den == 0) throw ConfigInvalid("MicroState: zero slope denominator");
  if ((slope_offset.num * static_cast<std::int64_t>(size())) % slope_offset.den != 0)
    throw ConfigInvalid("MicroState: zeta * N must be an integer");
  if (!(time >= 0.0) || !std::isfinite(time)) throw ConfigInvalid("MicroState: bad time");
}

double KmcParams::q() const noexcept {
  if (p == 1) return std::numeric_limits<double>::infinity();
  return static_cast<double>(p) / static_cast<double>(p - 1);
}

void KmcParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigInvalid("KmcParams: beta must be finite and > 0");
  if (p != 1 && p != 2) throw ConfigInvalid("KmcParams: p must be 1 or 2");
  if (!(rho_evap >= 0.0) || !std::isfinite(rho_evap)) throw ConfigInvalid("KmcParams: rho_evap must be >= 0");
  if (!(tau_dep_inv >= 0.0) || !std::isfinite(tau_dep_inv))
    throw ConfigInvalid("KmcParams: tau_dep_inv must be >= 0");
  if (!std::isfinite(mu_dep)) throw ConfigInvalid("KmcParams: mu_dep must be finite");
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::HopLeft: return "hop_left";
    case EventKind::HopRight: return "hop_right";
    case EventKind::Evaporate: return "evaporate";
    case EventKind::Deposit: return "deposit";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Rates

double potential(double z, int p) noexcept {
  const double a = std::abs(z);
  return p == 1 ? a : a * a;
}

double coordination_number(const MicroState& state, std::size_t site, const KmcParams& params) {
  const auto i = static_cast<std::int64_t>(site);
  const double fwd = static_cast<double>(state.forward_diff(i));
  const double bwd = static_cast<double>(state.backward_diff(i));
  // Removing one atom at `site` raises the forward difference and lowers the backward one.
  const int p = params.p;
  return 0.5 * (potential(fwd + 1.0, p) - potential(fwd, p) + potential(bwd - 1.0, p) - potential(bwd, p));
}

double hop_rate(const MicroState& state, std::size_t site, const KmcParams& params) {
  return 0.5 * std::exp(-2.0 * params.beta * coordination_number(state, site, params));
}

double evap_rate(double z_i, double z_im1, const KmcParams& params, std::size_t n) {
  const double scale = std::pow(static_cast<double>(n), -static_cast<double>(params.p));
  return params.rho_evap *
         std::exp(-0.5 * params.beta * scale * (potential(z_i, params.p) - potential(z_im1, params.p)));
}

double dep_rate(const KmcParams& params) noexcept {
  return params.tau_dep_inv * std::exp(-0.5 * params.beta * params.mu_dep);
}

double site_evap_rate(const MicroState& state, std::size_t site, const KmcParams& params) {
  const auto i = static_cast<std::int64_t>(site);
  return evap_rate(state.slope(i), state.slope(i - 1), params, state.size());
}

// ---------------------------------------------------------------------------
// Simulator

Simulator::Simulator(MicroState initial, KmcParams params)
    : state_(std::move(initial)), params_(params) {
  state_.validate();
  params_.validate();
  const std::size_t n = state_.size();
  hop_.assign(n, 0.0);
  evap_.assign(n, 0.0);
  rate_.assign(n, 0.0);
  dep_ = dep_rate(params_);
  exp_table_.resize(2 * kTable + 1);
  for (int k = -kTable; k <= kTable; ++k)
    exp_table_[static_cast<std::size_t>(k + kTable)] = 0.5 * std::exp(-2.0 * params_.beta * k);
  for (std::size_t i = 0; i < n; ++i) refresh_site(i);
  resum();
}

double Simulator::hop_factor(double n) const {
  // n is an integer for p in {1, 2}.
  const double r = std::nearbyint(n);
  if (r == n && std::abs(r) <= kTable) return exp_table_[static_cast<std::size_t>(static_cast<int>(r) + kTable)];
  return 0.5 * std::exp(-2.0 * params_.beta * n);
}

double Simulator::site_total(std::size_t i) const { return hop_[i] + evap_[i] + dep_; }

void Simulator::refresh_site(std::size_t i) {
  hop_[i] = hop_factor(coordination_number(state_, i, params_));
  evap_[i] = params_.rho_evap > 0.0 ? site_evap_rate(state_, i, params_) : 0.0;
  const double r = site_total(i);
  if (!std::isfinite(r)) throw Overflow("kmc: non-finite rate at site " + std::to_string(i));
  total_ += r - rate_[i];
  rate_[i] = r;
}

void Simulator::refresh_around(std::size_t i) {
  const std::size_t n = state_.size();
  refresh_site((i + n - 1) % n);
  refresh_site(i);
  refresh_site((i + 1) % n);
}

void Simulator::resum() {
  double t = 0.0;
  for (double r : rate_) t += r;
  total_ = t;
}

EventRecord Simulator::step(CounterRng& rng) {
  if (!(total_ > 0.0)) throw ZeroTotalRate("kmc: total event rate is zero");
  const std::size_t n = state_.size();
  const double waiting = -std::log(rng.uniform_pos()) / total_;

  double target = rng.uniform() * total_;
  std::size_t site = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (target < rate_[i]) {
      site = i;
      break;
    }
    target -= rate_[i];
  }
  if (site == n) {
    // Rounding drift in the running total; fall back to the last open site.
    for (std::size_t i = n; i-- > 0;) {
      if (rate_[i] > 0.0) {
        site = i;
        target = rate_[i] * 0.999999999;
        break;
      }
    }
  }

  EventKind kind;
  const double half_hop = 0.5 * hop_[site];
  if (target < half_hop) kind = EventKind::HopLeft;
  else if (target < hop_[site]) kind = EventKind::HopRight;
  else if (target < hop_[site] + evap_[site]) kind = EventKind::Evaporate;
  else kind = EventKind::Deposit;

  const EventRecord rec{kind, site, waiting};
  apply_event(state_, rec);
  state_.time += waiting;
  ++events_;

  refresh_around(site);
  if (kind == EventKind::HopLeft) refresh_around((site + n - 1) % n);
  if (kind == EventKind::HopRight) refresh_around((site + 1) % n);
  if (events_ % n == 0) resum();
  return rec;
}

std::uint64_t Simulator::advance_to(double t_stop, CounterRng& rng,
                                    const std::function<void(const EventRecord&, const MicroState&)>& on_event) {
  std::uint64_t count = 0;
  while (true) {
    if (!(total_ > 0.0)) throw ZeroTotalRate("kmc: total event rate is zero");
    // Peek the waiting time without consuming state: draw it, and if it
    // overshoots, discard the draw and stop at t_stop.
    CounterRng probe = rng;
    const double waiting = -std::log(probe.uniform_pos()) / total_;
    if (state_.time + waiting > t_stop) {
      rng = probe;
      state_.time = std::max(state_.time, t_stop);
      return count;
    }
    const auto rec = step(rng);
    ++count;
    if (on_event) on_event(rec, state_);
  }
}

std::pair<MicroState, EventRecord> step_ssa(const MicroState& state, const KmcParams& params,
                                            CounterRng& rng) {
  Simulator sim(state, params);
  const auto rec = sim.step(rng);
  return {sim.state(), rec};
}

// ---------------------------------------------------------------------------
// Trajectories and ensembles

Trajectory run_trajectory(const MicroState& initial, const KmcParams& params,
                          std::span<const double> sample_times, CounterRng& rng, bool record_events) {
  Simulator sim(initial, params);
  Trajectory traj;
  traj.sample_times.assign(sample_times.begin(), sample_times.end());
  std::function<void(const EventRecord&, const MicroState&)> hook;
  if (record_events) {
    hook = [&traj](const EventRecord& e, const MicroState& s) {
      traj.events.push_back(e);
      traj.event_times.push_back(s.time);
    };
  }
  double last = initial.time;
  for (double ts : sample_times) {
    if (ts < last) throw ConfigInvalid("run_trajectory: sample times must be nondecreasing");
    traj.n_events += sim.advance_to(ts, rng, hook);
    traj.snapshots.push_back(sim.state().heights);
    last = ts;
  }
  traj.final_state = sim.state();
  return traj;
}

unsigned default_threads() {
  if (const char* env = std::getenv("CRYSTALFLOW_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

EnsembleResult run_ensemble(const MicroState& initial, const KmcParams& params, double t_final,
                            std::size_t n_reps, const EnsembleOptions& options) {
  if (n_reps < 1) throw ConfigInvalid("run_ensemble: n_reps must be >= 1");
  if (!(t_final >= initial.time)) throw ConfigInvalid("run_ensemble: t_final before initial time");
  initial.validate();
  params.validate();

  EnsembleResult out;
  out.sample_times = options.sample_times.empty() ? std::vector<double>{t_final} : options.sample_times;
  if (out.sample_times.back() > t_final)
    throw ConfigInvalid("run_ensemble: sample time beyond t_final");

  std::vector<Trajectory> trajs(n_reps);
  std::vector<std::exception_ptr> errors(n_reps);
  const unsigned cap = options.threads > 0 ? options.threads : default_threads();
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cap, n_reps));
  auto work = [&](unsigned w) {
    for (std::size_t r = w; r < n_reps; r += workers) {
      try {
        CounterRng rng(params.seed, r);
        trajs[r] = run_trajectory(initial, params, out.sample_times, rng, options.record_events);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const std::size_t n = initial.size();
  const std::size_t ns = out.sample_times.size();
  out.mean.assign(ns, std::vector<double>(n, 0.0));
  out.variance.assign(ns, std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      // Welford in replicate order.
      double mean = 0.0, m2 = 0.0;
      for (std::size_t r = 0; r < n_reps; ++r) {
        const double x = static_cast<double>(trajs[r].snapshots[s][i]);
        const double d = x - mean;
        mean += d / static_cast<double>(r + 1);
        m2 += d * (x - mean);
      }
      out.mean[s][i] = mean;
      out.variance[s][i] = n_reps > 1 ? m2 / static_cast<double>(n_reps - 1) : 0.0;
    }
  }
  for (const auto& t : trajs) out.total_events += t.n_events;
  if (options.keep_trajectories) out.trajectories = std::move(trajs);
  return out;
}

// ---------------------------------------------------------------------------
// Coarse graining

CoarseProfile coarse_grain(std::span<const double> heights, double t, std::size_t M,
                           std::optional<double> rescale_q) {
  const std::size_t n = heights.size();
  if (M < 2 || n % M != 0) throw BadPartition("coarse_grain: box size must be >= 2 and divide N");
  CoarseProfile out;
  out.t = t;
  out.box = M;
  const std::size_t boxes = n / M;
  out.h_bar.resize(boxes);
  out.z_bar.resize(boxes);
  for (std::size_t k = 0; k < boxes; ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < M; ++j) sum += heights[k * M + j];
    out.h_bar[k] = sum / static_cast<double>(M);
    out.z_bar[k] = (heights[k * M + M - 1] - heights[k * M]) / static_cast<double>(M - 1);
  }
  if (rescale_q) {
    const double q = *rescale_q;
    if (!std::isfinite(q)) throw OutOfRange("coarse_grain: rescaling undefined for q = infinity (p = 1)");
    const double nn = static_cast<double>(n);
    const double hs = std::pow(nn, -q);
    const double zs = std::pow(nn, 1.0 - q);
    for (auto& v : out.h_bar) v *= hs;
    for (auto& v : out.z_bar) v *= zs;
    out.t = t / std::pow(nn, q + 2.0);
  }
  return out;
}

CoarseProfile coarse_grain(const MicroState& state, std::size_t M, std::optional<double> rescale_q) {
  std::vector<double> h(state.heights.begin(), state.heights.end());
  return coarse_grain(h, state.time, M, rescale_q);
}

// ---------------------------------------------------------------------------
// Generator

double generator_apply(const TestFunctional& phi, const MicroState& state, const KmcParams& params) {
  const std::size_t n = state.size();
  const double base = phi(state);
  const double dep = dep_rate(params);
  double acc = 0.0;
  MicroState work = state;
  auto delta = [&](const EventRecord& e) {
    apply_event(work, e);
    const double v = phi(work) - base;
    work.heights = state.heights;
    return v;
  };
  for (std::size_t a = 0; a < n; ++a) {
    const double directed = 0.5 * hop_rate(state, a, params);
    acc += directed * delta({EventKind::HopLeft, a, 0.0});
    acc += directed * delta({EventKind::HopRight, a, 0.0});
    if (dep > 0.0) acc += dep * delta({EventKind::Deposit, a, 0.0});
    if (params.rho_evap > 0.0) acc += site_evap_rate(state, a, params) * delta({EventKind::Evaporate, a, 0.0});
  }
  return acc;
}

}  // namespace crystalflow::kmc

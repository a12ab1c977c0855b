#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "crystalflow/rng.hpp"

/// Lattice kinetic Monte Carlo for a 1-D solid-on-solid surface with
/// curvature-activated hopping, evaporation and deposition.
namespace crystalflow::kmc {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Integer height columns h_0..h_{N-1} on a screw-periodic lattice:
/// h(i + N) = h(i) + zeta * N. The lattice constant is fixed to 1.
struct MicroState {
  std::vector<std::int64_t> heights;
  Rational slope_offset;  // zeta
  double time = 0.0;

  static MicroState flat(std::size_t n, std::int64_t level = 0);

  std::size_t size() const noexcept { return heights.size(); }
  /// zeta * N; validate() guarantees it is an integer.
  std::int64_t screw_shift() const noexcept;
  /// Height at any integer index, honouring screw periodicity.
  std::int64_t height(std::int64_t i) const noexcept;
  /// Forward difference h(i+1) - h(i).
  std::int64_t forward_diff(std::int64_t i) const noexcept { return height(i + 1) - height(i); }
  /// Backward difference h(i) - h(i-1).
  std::int64_t backward_diff(std::int64_t i) const noexcept { return height(i) - height(i - 1); }
  /// Rescaled slope z_i = (h_{i+1} - h_i) / N^{-1}.
  double slope(std::int64_t i) const noexcept {
    return static_cast<double>(size()) * static_cast<double>(forward_diff(i));
  }
  std::int64_t mass() const noexcept;

  /// Throws ConfigInvalid on N < 4, zero denominator, non-integral zeta*N or
  /// negative time.
  void validate() const;
};

struct KmcParams {
  double beta = 1.0;
  int p = 2;  // V(z) = |z|^p
  double rho_evap = 0.0;
  double tau_dep_inv = 0.0;
  double mu_dep = 0.0;
  std::uint64_t seed = 0;

  /// q = p / (p - 1); +infinity for p = 1.
  double q() const noexcept;
  void validate() const;
};

enum class EventKind { HopLeft, HopRight, Evaporate, Deposit };
std::string_view to_string(EventKind kind) noexcept;

struct EventRecord {
  EventKind kind;
  std::size_t site;
  double waiting_time;
};

double potential(double z, int p) noexcept;

/// n(site) = 1/2 [V(D+ J h) - V(D+ h) + V(D- J h) - V(D- h)] where J removes
/// one atom from `site`. Flat surface gives 1 for both p = 1 and p = 2.
double coordination_number(const MicroState& state, std::size_t site, const KmcParams& params);

/// Total hop rate out of `site`, 1/2 exp(-2 beta n); each of the two
/// neighbours receives half of it.
double hop_rate(const MicroState& state, std::size_t site, const KmcParams& params);

/// rho_evap * exp(-1/2 beta N^{-p} [V(z_i) - V(z_{i-1})]) with rescaled slopes.
double evap_rate(double z_i, double z_im1, const KmcParams& params, std::size_t n);

/// tau_dep^{-1} * exp(-1/2 beta mu).
double dep_rate(const KmcParams& params) noexcept;

/// evap_rate evaluated at `site` of `state`.
double site_evap_rate(const MicroState& state, std::size_t site, const KmcParams& params);

/// Rejection-free stochastic simulation of the surface process. Keeps a
/// per-site rate table; after each event only the sites whose neighbourhood
/// changed are re-evaluated. Event selection is a linear scan.
class Simulator {
 public:
  Simulator(MicroState initial, KmcParams params);

  /// Applies exactly one event. Throws ZeroTotalRate when no channel is open.
  EventRecord step(CounterRng& rng);

  /// Runs events until the next one would land after `t_stop`, then sets the
  /// clock to `t_stop` (the exponential clock is memoryless). Each applied
  /// event is passed to `on_event` when provided. Returns the event count.
  std::uint64_t advance_to(double t_stop, CounterRng& rng,
                           const std::function<void(const EventRecord&, const MicroState&)>& on_event = {});

  const MicroState& state() const noexcept { return state_; }
  const KmcParams& params() const noexcept { return params_; }
  double total_rate() const noexcept { return total_; }
  std::uint64_t events() const noexcept { return events_; }

 private:
  double site_total(std::size_t i) const;
  void refresh_site(std::size_t i);
  void refresh_around(std::size_t i);
  void resum();
  double hop_factor(double n) const;

  MicroState state_;
  KmcParams params_;
  std::vector<double> hop_;
  std::vector<double> evap_;
  double dep_ = 0.0;
  std::vector<double> rate_;
  double total_ = 0.0;
  std::uint64_t events_ = 0;
  std::vector<double> exp_table_;  // exp(-2 beta n) for integer n in [-kTable, kTable]
};

/// Functional form of one SSA step on a copy of `state`.
std::pair<MicroState, EventRecord> step_ssa(const MicroState& state, const KmcParams& params,
                                            CounterRng& rng);

struct Trajectory {
  std::vector<double> sample_times;
  std::vector<std::vector<std::int64_t>> snapshots;  // heights at each sample time
  std::vector<EventRecord> events;                   // only when recorded
  std::vector<double> event_times;                   // absolute time of each recorded event
  MicroState final_state;
  std::uint64_t n_events = 0;
};

/// One trajectory sampled at increasing `sample_times` (last = t_final).
Trajectory run_trajectory(const MicroState& initial, const KmcParams& params,
                          std::span<const double> sample_times, CounterRng& rng,
                          bool record_events = false);

struct EnsembleOptions {
  std::vector<double> sample_times;  // empty => {t_final}
  unsigned threads = 0;              // 0 => CRYSTALFLOW_THREADS or hardware concurrency
  bool keep_trajectories = false;
  bool record_events = false;  // applies to kept trajectories
};

struct EnsembleResult {
  std::vector<double> sample_times;
  std::vector<std::vector<double>> mean;      // [sample][site]
  std::vector<std::vector<double>> variance;  // unbiased, 0 for a single replicate
  std::vector<Trajectory> trajectories;       // replicate order, when kept
  std::uint64_t total_events = 0;
};

/// Replicate r draws from CounterRng(params.seed, r); results do not depend on
/// how replicates are scheduled across threads.
EnsembleResult run_ensemble(const MicroState& initial, const KmcParams& params, double t_final,
                            std::size_t n_reps, const EnsembleOptions& options = {});

/// Thread cap: CRYSTALFLOW_THREADS if set and positive, else hardware concurrency.
unsigned default_threads();

struct CoarseProfile {
  double t = 0.0;
  std::size_t box = 0;
  std::vector<double> h_bar;  // box means
  std::vector<double> z_bar;  // (h_last - h_first) / (M - 1) per box
};

/// Box averages over M consecutive columns. With `rescale_q`, heights are
/// multiplied by N^{-q}, slopes by N^{1-q} and time divided by N^{q+2}.
CoarseProfile coarse_grain(std::span<const double> heights, double t, std::size_t M,
                           std::optional<double> rescale_q = std::nullopt);
CoarseProfile coarse_grain(const MicroState& state, std::size_t M,
                           std::optional<double> rescale_q = std::nullopt);

using TestFunctional = std::function<double(const MicroState&)>;

/// Exact generator of the simulated jump process applied to phi at `state`:
/// directed hops at hop_rate/2, deposition and evaporation at every site.
double generator_apply(const TestFunctional& phi, const MicroState& state, const KmcParams& params);

}  // namespace crystalflow::kmc

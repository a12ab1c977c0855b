#include <doctest.h>

#include <cmath>

#include "crystalflow/errors.hpp"
#include "crystalflow/kmc.hpp"
#include "support/oracles.hpp"

using namespace crystalflow;
using namespace crystalflow::kmc;

namespace {

MicroState from(std::vector<std::int64_t> h) {
  MicroState s;
  s.heights = std::move(h);
  return s;
}

}  // namespace

TEST_CASE("coordination number on simple profiles") {
  const KmcParams p2{1.0, 2};
  const KmcParams p1{1.0, 1};
  const auto flat = MicroState::flat(8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(coordination_number(flat, i, p2) == 1.0);
    CHECK(coordination_number(flat, i, p1) == 1.0);
  }
  // Isolated adatom on a flat surface: removing it lowers the energy.
  auto bump = from({0, 0, 0, 1, 0, 0, 0, 0});
  CHECK(coordination_number(bump, 3, p2) == -1.0);
  CHECK(coordination_number(bump, 3, p1) == -1.0);
  // p = 2 closed form n = fwd - bwd + 1.
  testing::Gen g(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::int64_t> h(8);
    for (auto& v : h) v = g.integer(-5, 5);
    const auto s = from(h);
    const std::size_t i = static_cast<std::size_t>(g.integer(0, 7));
    const double expect = static_cast<double>(s.forward_diff(i) - s.backward_diff(i) + 1);
    CHECK(coordination_number(s, i, p2) == expect);
  }
}

TEST_CASE("coordination number is half the energy cost of removal") {
  testing::Gen g(6);
  for (int p : {1, 2}) {
    const KmcParams params{1.0, p};
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::int64_t> h(6);
      for (auto& v : h) v = g.integer(-4, 4);
      auto s = from(h);
      auto energy = [&](const MicroState& m) {
        double e = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) e += potential(static_cast<double>(m.forward_diff(i)), p);
        return e;
      };
      const std::size_t i = static_cast<std::size_t>(g.integer(0, 5));
      auto removed = s;
      removed.heights[i] -= 1;
      CHECK(coordination_number(s, i, params) == doctest::Approx(0.5 * (energy(removed) - energy(s))));
    }
  }
}

TEST_CASE("rates") {
  const KmcParams p{1.0, 2};
  CHECK(hop_rate(MicroState::flat(4), 0, p) == doctest::Approx(0.5 * std::exp(-2.0)));
  KmcParams e{2.0, 2, 0.7, 0.3, 0.5};
  CHECK(evap_rate(3.0, 3.0, e, 16) == doctest::Approx(0.7));
  CHECK(evap_rate(16.0, 0.0, e, 16) == doctest::Approx(0.7 * std::exp(-0.5 * 2.0 * 1.0)));
  CHECK(dep_rate(e) == doctest::Approx(0.3 * std::exp(-0.5 * 2.0 * 0.5)));
}

TEST_CASE("screw-periodic heights") {
  MicroState s = from({0, 1, 2, 3});
  s.slope_offset = {1, 1};
  s.validate();
  CHECK(s.screw_shift() == 4);
  CHECK(s.height(4) == 4);
  CHECK(s.height(-1) == -1);
  CHECK(s.forward_diff(3) == 1);
  CHECK(s.slope(3) == 4.0);
  // Uniform slope 1: every site looks flat apart from the tilt.
  CHECK(coordination_number(s, 0, {1.0, 2}) == 1.0);
  MicroState bad = from({0, 0, 0, 0, 0, 0});
  bad.slope_offset = {1, 4};
  CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
  CHECK_THROWS_AS(from({0, 0}).validate(), ConfigInvalid);
}

TEST_CASE("single SSA step on a flat 4-site surface") {
  const KmcParams p{1.0, 2};
  Simulator sim(MicroState::flat(4), p);
  CHECK(sim.total_rate() == doctest::Approx(4 * 0.5 * std::exp(-2.0)));
  CHECK(sim.total_rate() == doctest::Approx(0.270671).epsilon(1e-6));
  CounterRng rng(1, 0);
  const auto [next, rec] = step_ssa(MicroState::flat(4), p, rng);
  CHECK(next.mass() == 0);
  CHECK(rec.waiting_time > 0.0);
  CHECK((rec.kind == EventKind::HopLeft || rec.kind == EventKind::HopRight));
  CHECK(next.heights[rec.site] == -1);
}

TEST_CASE("zero total rate is reported") {
  // exp(-2 beta) underflows for a flat surface at very large beta.
  Simulator sim(MicroState::flat(4), {1000.0, 2});
  CounterRng rng(1, 0);
  CHECK(sim.total_rate() == 0.0);
  CHECK_THROWS_AS(sim.step(rng), ZeroTotalRate);
}

TEST_CASE("hop-only dynamics conserve mass and keep rates consistent") {
  testing::Gen g(7);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::int64_t> h(16);
    for (auto& v : h) v = g.integer(-3, 3);
    Simulator sim(from(h), {g.uniform(0.3, 1.5), 2});
    const auto m0 = sim.state().mass();
    CounterRng rng(9, trial);
    for (int e = 0; e < 20000; ++e) sim.step(rng);
    CHECK(sim.state().mass() == m0);
    double fresh = 0.0;
    for (std::size_t i = 0; i < 16; ++i) fresh += hop_rate(sim.state(), i, sim.params());
    CHECK(sim.total_rate() == doctest::Approx(fresh).epsilon(1e-10));
  }
}

TEST_CASE("advance_to stops exactly at the requested time") {
  Simulator sim(MicroState::flat(8), {1.0, 2, 0.0, 0.2, 0.0});
  CounterRng rng(3, 0);
  std::uint64_t seen = 0;
  const auto n = sim.advance_to(50.0, rng, [&](const EventRecord&, const MicroState& s) {
    ++seen;
    CHECK(s.time <= 50.0);
  });
  CHECK(n == seen);
  CHECK(sim.state().time == 50.0);
  CHECK(n > 0);
}

TEST_CASE("trajectories are deterministic and ensembles schedule-independent") {
  const KmcParams p{0.8, 2, 0.1, 0.1, 0.0, 42};
  const std::vector<double> ts{1.0, 2.0, 5.0};
  CounterRng a(42, 3), b(42, 3);
  const auto ta = run_trajectory(MicroState::flat(8), p, ts, a, true);
  const auto tb = run_trajectory(MicroState::flat(8), p, ts, b, true);
  CHECK(ta.snapshots == tb.snapshots);
  CHECK(ta.events.size() == tb.events.size());
  CHECK(ta.events.size() == ta.n_events);

  EnsembleOptions one, three;
  one.sample_times = ts;
  one.threads = 1;
  three = one;
  three.threads = 3;
  const auto e1 = run_ensemble(MicroState::flat(8), p, 5.0, 7, one);
  const auto e3 = run_ensemble(MicroState::flat(8), p, 5.0, 7, three);
  CHECK(e1.mean == e3.mean);
  CHECK(e1.variance == e3.variance);
  CHECK(e1.total_events == e3.total_events);
}

TEST_CASE("coarse graining") {
  std::vector<double> h{0, 1, 2, 3, 10, 10, 10, 10};
  const auto c = coarse_grain(h, 2.0, 4);
  CHECK(c.h_bar == std::vector<double>{1.5, 10.0});
  CHECK(c.z_bar == std::vector<double>{1.0, 0.0});
  CHECK_THROWS_AS(coarse_grain(h, 0.0, 3), BadPartition);
  const auto r = coarse_grain(h, 64.0, 4, 2.0);
  CHECK(r.h_bar[1] == doctest::Approx(10.0 / 64.0));
  CHECK(r.z_bar[0] == doctest::Approx(1.0 / 8.0));
  CHECK(r.t == doctest::Approx(64.0 / 4096.0));
  CHECK_THROWS_AS(coarse_grain(h, 0.0, 4, INFINITY), OutOfRange);
}

TEST_CASE("generator of simple observables") {
  KmcParams p{0.7, 2, 0.3, 0.2, 0.4};
  testing::Gen g(8);
  std::vector<std::int64_t> h(8);
  for (auto& v : h) v = g.integer(-2, 2);
  const auto s = from(h);
  // Mass changes only through deposition and evaporation.
  double expect = 8 * dep_rate(p);
  for (std::size_t i = 0; i < 8; ++i) expect -= site_evap_rate(s, i, p);
  CHECK(generator_apply([](const MicroState& m) { return double(m.mass()); }, s, p) == doctest::Approx(expect));
  // Constant observables are annihilated.
  CHECK(generator_apply([](const MicroState&) { return 3.0; }, s, p) == 0.0);
  // Hop-only: mass is invariant.
  KmcParams hop{0.7, 2};
  CHECK(generator_apply([](const MicroState& m) { return double(m.mass()); }, s, hop) == 0.0);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(Simulator(MicroState::flat(4), {0.0, 2}), ConfigInvalid);
  CHECK_THROWS_AS(Simulator(MicroState::flat(4), {1.0, 3}), ConfigInvalid);
  CHECK_THROWS_AS(Simulator(MicroState::flat(4), {1.0, 2, -1.0}), ConfigInvalid);
  CHECK(KmcParams{1.0, 2}.q() == 2.0);
  CHECK(std::isinf(KmcParams{1.0, 1}.q()));
}

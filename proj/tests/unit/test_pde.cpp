#include <doctest.h>

#include <cmath>

#include "crystalflow/errors.hpp"
#include "crystalflow/fourier.hpp"
#include "crystalflow/pde.hpp"
#include "support/oracles.hpp"

using namespace crystalflow;
using namespace crystalflow::pde;
using testing::kPi;

namespace {

double mode_amplitude(const GridField& f, int k) { return 2.0 * std::abs(fourier::forward(f.view())[k]); }

const double kLinRate = 16 * std::pow(kPi, 4) + 4 * kPi * kPi;

}  // namespace

TEST_CASE("u_from_h") {
  for (double v : u_from_h(GridField::constant(32, 4.0)).values) CHECK(v == 1.0);
  const double A = 0.05;
  const auto h = GridField::sample(64, [&](double x) { return A * std::sin(2 * kPi * x); });
  const auto u = u_from_h(h);
  for (std::size_t j = 0; j < 64; ++j)
    CHECK(std::abs(u[j] - std::exp(4 * kPi * kPi * A * std::sin(2 * kPi * h.x(j)))) < 1e-10);
  CHECK_THROWS_AS(u_from_h(GridField::sample(64, [](double x) { return 20.0 * std::sin(2 * kPi * x); })), Overflow);
}

TEST_CASE("u_from_h round trip through the inverse Laplacian") {
  testing::Gen g(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto h = GridField::on_torus(g.band_limited(64, 8, 0.002));
    const double m = h.mean();
    for (auto& v : h.values) v -= m;
    const auto u = u_from_h(h);
    std::vector<double> logu(64);
    for (std::size_t j = 0; j < 64; ++j) logu[j] = std::log(u[j]);
    const auto back = fourier::apply_symbol(logu, [](double w) { return w == 0.0 ? 0.0 : 1.0 / (w * w); });
    for (std::size_t j = 0; j < 64; ++j) CHECK(std::abs(back[j] - h[j]) < 1e-10);
  }
}

TEST_CASE("regularised rhs") {
  const RegParams reg{0.01, 0.5};
  for (double v : regularized_rhs(GridField::constant(32, 2.0), reg).values) CHECK(v == 0.0);
  CHECK_THROWS_AS(regularized_rhs(GridField::constant(32, 0.0), reg), NonPositiveState);
  CHECK_THROWS_AS(regularized_rhs(GridField::constant(32, 1.0), RegParams{0.01, 1.0}), ConfigInvalid);
}

TEST_CASE("regularised rhs against a dense finite-difference oracle") {
  const RegParams reg{0.01, 0.5};
  auto f = [](double x) { return 1.0 + 0.1 * std::sin(2 * kPi * x); };
  const auto u = GridField::sample(64, f);
  const auto rhs = regularized_rhs(u, reg);
  const std::size_t big = 256;
  std::vector<double> dense(big);
  for (std::size_t j = 0; j < big; ++j) dense[j] = f(double(j) / big);
  const auto d4 = testing::fd_derivative(dense, 4, 1.0 / big);
  const auto d2 = testing::fd_derivative(dense, 2, 1.0 / big);
  const double ea = std::pow(reg.epsilon, reg.alpha);
  double scale = 0.0;
  for (double v : rhs.values) scale = std::max(scale, std::abs(v));
  for (std::size_t j = 0; j < 64; ++j) {
    const std::size_t J = j * (big / 64);
    const double uj = dense[J];
    const double ref = -std::pow(uj, 1 + reg.alpha) / (std::pow(uj, reg.alpha) + ea) * (d4[J] - d2[J]);
    CHECK(std::abs(rhs[j] - ref) <= 1e-5 * scale);
  }
}

TEST_CASE("rhs approaches the unregularised form as epsilon shrinks") {
  const auto u = GridField::sample(64, [](double x) { return 1.0 + 0.3 * std::cos(2 * kPi * x); });
  const auto lu = fourier::apply_symbol(u.view(), [](double w) { return w * w * w * w + w * w; });
  std::vector<double> errs;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto r = regularized_rhs(u, {eps, 0.5});
    double e = 0.0;
    for (std::size_t j = 0; j < 64; ++j) e = std::max(e, std::abs(r[j] + u[j] * lu[j]));
    errs.push_back(e / std::sqrt(eps));
  }
  // error / eps^alpha stays bounded.
  CHECK(errs[1] <= 1.5 * errs[0]);
  CHECK(errs[2] <= 1.5 * errs[0]);
}

TEST_CASE("step_pde keeps constants and follows the linear rate") {
  const RegParams reg{1e-3, 0.5};
  const auto c = GridField::constant(64, 1.7);
  auto s = c;
  for (int i = 0; i < 100; ++i) s = step_pde(s, 1e-3, reg);
  CHECK(s.values == c.values);

  const double a = 1e-8, m0 = 1.0 / (1.0 + std::sqrt(reg.epsilon));
  const auto u = GridField::sample(64, [&](double x) { return 1.0 + a * std::sin(2 * kPi * x); });
  for (double dtrate : {0.01, 0.05, 0.09}) {
    const double dt = dtrate / (m0 * kLinRate);
    const double ratio = mode_amplitude(step_pde(u, dt, reg), 1) / mode_amplitude(u, 1);
    CHECK(ratio == doctest::Approx(std::exp(-dtrate)).epsilon(0.01));
  }
  CHECK_THROWS_AS(step_pde(GridField::constant(64, -1.0), 1e-3, reg), NonPositiveState);
}

TEST_CASE("step_pde one-step defect shrinks with dt") {
  const RegParams reg{1e-2, 0.5};
  const auto u = GridField::sample(64, [](double x) { return 1.0 + 0.3 * std::sin(2 * kPi * x); });
  auto defect = [&](double dt) {
    auto ref = u;
    for (int i = 0; i < 2000; ++i) ref = step_pde(ref, dt / 2000, reg);
    const auto one = step_pde(u, dt, reg);
    double e = 0.0;
    for (std::size_t j = 0; j < 64; ++j) e = std::max(e, std::abs(one[j] - ref[j]));
    return e;
  };
  const double e1 = defect(2e-4), e2 = defect(1e-4);
  CHECK(std::log2(e1 / e2) >= 1.0);
}

TEST_CASE("solve_pde on constant data") {
  const RegParams reg{1e-3, 0.5};
  TimeControl tc;
  tc.sample_times = {0.1, 0.2};
  const auto run = solve_pde(GridField::constant(64, 1.0), reg, 0.5, tc);
  const auto& r = run.report;
  CHECK(r.times == std::vector<double>{0.0, 0.1, 0.2, 0.5});
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    CHECK(r.E[i] == 0.0);
    CHECK(r.F[i] == doctest::Approx(1.0 + reg.epsilon).epsilon(1e-14));
  }
  CHECK(r.E_integral.back() == 0.0);
  CHECK_THROWS_AS(solve_pde(GridField::constant(12, 1.0), reg, 0.5, tc), ConfigInvalid);
  CHECK_THROWS_AS(solve_pde(GridField::constant(16, -1.0), reg, 0.5, tc), ConfigInvalid);
}

TEST_CASE("solve_pde dissipates energy and lands on sample times") {
  const RegParams reg{1e-2, 0.5};
  TimeControl tc;
  tc.tol = 1e-6;
  for (int i = 1; i < 10; ++i) tc.sample_times.push_back(0.001 * i);
  const auto u0 = GridField::sample(64, [](double x) { return 1.0 + 0.5 * std::sin(2 * kPi * x); });
  const auto run = solve_pde(u0, reg, 0.01, tc);
  const auto& r = run.report;
  REQUIRE(r.times.size() == 11);
  for (int i = 1; i < 10; ++i) CHECK(r.times[i] == 0.001 * i);
  for (std::size_t i = 1; i < r.E.size(); ++i) CHECK(r.E[i] <= r.E[i - 1] + 1e-8);
  CHECK(r.worst_E_increase <= 1e-8);
  CHECK(r.global_min_u > 0.0);
  CHECK(run.snapshots.size() == r.times.size());
}

TEST_CASE("h equation") {
  TimeControl tc;
  const auto c = GridField::constant(32, 0.25);
  const auto traj = solve_h_equation(c, 0.1, tc);
  for (double v : traj.snapshots.back().values) CHECK(v == 0.25);

  const double a = 1e-8;
  const auto h0 = GridField::sample(64, [&](double x) { return a * std::cos(2 * kPi * x); });
  tc.sample_times = {1e-3};
  tc.tol = 1e-10;
  const auto t2 = solve_h_equation(h0, 2e-3, tc);
  const double rate = -std::log(mode_amplitude(t2.snapshots.back(), 1) / mode_amplitude(h0, 1)) / 2e-3;
  CHECK(rate == doctest::Approx(kLinRate).epsilon(0.01));

  const auto big = GridField::sample(64, [](double x) { return 20.0 * std::sin(2 * kPi * x); });
  CHECK_THROWS_AS(step_h(big, 1e-6), Overflow);
}

TEST_CASE("h and u formulations agree for small smooth data") {
  const auto h0 = GridField::sample(64, [](double x) { return 0.01 * std::cos(2 * kPi * x) + 0.004 * std::sin(4 * kPi * x); });
  TimeControl tc;
  tc.tol = 1e-9;
  const auto ht = solve_h_equation(h0, 0.05, tc);
  const auto uh = u_from_h(ht.snapshots.back());
  const auto run = solve_pde(u_from_h(h0), {1e-6, 0.5}, 0.05, tc);
  CHECK(l2_distance(uh.view(), run.snapshots.back().view()) <= 1e-3);
}

TEST_CASE("controller rejects bad schedules") {
  TimeControl tc;
  tc.sample_times = {0.2, 0.1};
  CHECK_THROWS_AS(solve_h_equation(GridField::constant(16, 0.0), 1.0, tc), ConfigInvalid);
  tc.sample_times = {2.0};
  CHECK_THROWS_AS(solve_h_equation(GridField::constant(16, 0.0), 1.0, tc), ConfigInvalid);
  CHECK_THROWS_AS(solve_h_equation(GridField::constant(16, 0.0), -1.0, TimeControl{}), ConfigInvalid);
}

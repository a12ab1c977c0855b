#include <doctest.h>

#include <cmath>

#include "crystalflow/errors.hpp"
#include "crystalflow/statmech.hpp"
#include "support/oracles.hpp"

using namespace crystalflow;
using namespace crystalflow::statmech;

TEST_CASE("partition function against brute-force summation") {
  testing::Gen g(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double beta = g.uniform(0.2, 3.0);
    const int p = trial % 2 ? 1 : 2;
    const double eta = p == 1 ? g.uniform(-0.9, 0.9) * beta : g.uniform(-5.0, 5.0);
    const TiltedEnsemble e{beta, eta, p, 8};
    const double ref = testing::brute_log_z(beta, p, eta, p == 1 ? 20000 : 400);
    CHECK(log_partition_function(e) == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("untilted p=2 sum at beta = 1") {
  // 1 + 2 (e^-1 + e^-4 + e^-9 + ...)
  double ref = 1.0;
  for (int z = 1; z < 20; ++z) ref += 2.0 * std::exp(-double(z) * z);
  CHECK(partition_function({1.0, 0.0, 2, 8}) == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("p = 1 closed form and divergence") {
  // sum_z e^{-b|z| + eta z} = 1 + e^{eta-b}/(1-e^{eta-b}) + e^{-eta-b}/(1-e^{-eta-b})
  const double b = 1.3, eta = 0.4;
  const double ref = 1.0 + std::exp(eta - b) / (1 - std::exp(eta - b)) + std::exp(-eta - b) / (1 - std::exp(-eta - b));
  CHECK(partition_function({b, eta, 1, 8}) == doctest::Approx(ref).epsilon(1e-13));
  CHECK_THROWS_AS(partition_function({1.0, 1.0, 1, 8}), Divergent);
  CHECK_THROWS_AS(partition_function({1.0, -1.5, 1, 8}), Divergent);
}

TEST_CASE("invalid ensembles are rejected") {
  CHECK_THROWS_AS(partition_function({0.0, 0.0, 2, 8}), ConfigInvalid);
  CHECK_THROWS_AS(partition_function({1.0, 0.0, 3, 8}), ConfigInvalid);
  CHECK_THROWS_AS(partition_function({1.0, 0.0, 2, 4}), ConfigInvalid);
}

TEST_CASE("tilt mean is the derivative of log Z") {
  testing::Gen g(12);
  for (int trial = 0; trial < 30; ++trial) {
    const double beta = g.uniform(0.3, 2.0), eta = g.uniform(-3.0, 3.0), h = 1e-5;
    const double fd = (log_partition_function({beta, eta + h, 2, 8}) - log_partition_function({beta, eta - h, 2, 8})) / (2 * h);
    CHECK(tilt_mean({beta, eta, 2, 8}) == doctest::Approx(fd).epsilon(1e-8).scale(1.0));
    CHECK(tilt_variance({beta, eta, 2, 8}) > 0.0);
  }
}

TEST_CASE("symmetry: zero tilt has zero mean and sigma is even") {
  CHECK(tilt_mean({1.0, 0.0, 2, 8}) == 0.0);
  const auto a = surface_tension(0.3, 1.0, 2), b = surface_tension(-0.3, 1.0, 2);
  CHECK(a.sigma == doctest::Approx(b.sigma).epsilon(1e-12));
  CHECK(a.eta_star == doctest::Approx(-b.eta_star).epsilon(1e-12));
}

TEST_CASE("Legendre transform: maximiser reproduces the slope") {
  testing::Gen g(13);
  for (int trial = 0; trial < 40; ++trial) {
    const double beta = g.uniform(0.3, 2.0), u = g.uniform(-3.0, 3.0);
    const auto t = surface_tension(u, beta, 2);
    CHECK(std::abs(tilt_mean({beta, t.eta_star, 2, 8}) - u) < 1e-10);
    // sigma is a supremum: nearby tilts give no larger value.
    for (double d : {-1e-3, 1e-3}) {
      const double eta = t.eta_star + d;
      CHECK(eta * u - log_partition_function({beta, eta, 2, 8}) <= t.sigma + 1e-14);
    }
  }
  const auto z = surface_tension(0.0, 1.0, 2);
  CHECK(z.eta_star == 0.0);
  CHECK(z.sigma == doctest::Approx(-log_partition_function({1.0, 0.0, 2, 8})));
}

TEST_CASE("p = 1 Legendre transform and unreachable slopes") {
  const auto t = surface_tension(0.8, 1.0, 1);
  CHECK(std::abs(tilt_mean({1.0, t.eta_star, 1, 8}) - 0.8) < 1e-10);
  CHECK_THROWS_AS(surface_tension(1e14, 1.0, 1), OutOfRange);
  CHECK_THROWS_AS(surface_tension(NAN, 1.0, 2), OutOfRange);
}

TEST_CASE("surface tension is convex in u") {
  const double h = 0.05;
  for (double u = -1.0; u <= 1.0; u += 0.1) {
    const double c = surface_tension(u, 1.0, 2).sigma;
    const double l = surface_tension(u - h, 1.0, 2).sigma;
    const double r = surface_tension(u + h, 1.0, 2).sigma;
    CHECK(l + r - 2 * c >= -1e-10);
  }
}

TEST_CASE("scaled tension approaches 2 beta u") {
  for (double u : {0.1234, 0.4321}) {
    double prev = INFINITY;
    for (double k : {1.0, 10.0, 100.0, 1000.0}) {
      const double err = std::abs(scaled_tension_limit(u, 1.0, k) - 2.0 * u);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 2e-3);
  }
  CHECK_THROWS_AS(scaled_tension_limit(0.1, 1.0, 0.5), ConfigInvalid);
}

TEST_CASE("chemical potential of a quadratic bump") {
  // h = x^2 sampled on lattice units: second difference is 2, mu = -4.
  GridField h(std::vector<double>{0, 1, 4, 9, 16, 25, 36, 49}, 1.0);
  const auto mu = chemical_potential(h);
  for (std::size_t k = 1; k + 1 < h.size(); ++k) CHECK(mu[k] == doctest::Approx(-4.0));
  const auto s = GridField::sample(64, [](double x) { return std::sin(2 * testing::kPi * x); });
  const auto ms = chemical_potential(s);
  for (std::size_t k = 0; k < 64; ++k) {
    const double exact = 2 * std::pow(2 * testing::kPi, 2) * std::sin(2 * testing::kPi * s.x(k));
    CHECK(ms[k] == doctest::Approx(exact).epsilon(2e-3).scale(80.0));
  }
}

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace crystalflow {

/// Real samples on a uniform periodic grid. For continuum fields the grid
/// covers the unit torus [0,1) and spacing == 1/size(); lattice-unit
/// fields (used by the discrete chemical potential) carry spacing 1.
struct GridField {
  std::vector<double> values;
  double spacing = 1.0;

  GridField() = default;
  GridField(std::vector<double> v, double h) : values(std::move(v)), spacing(h) {}

  /// Field on the unit torus: spacing = 1/N.
  static GridField on_torus(std::vector<double> v);
  /// Samples f(x_j), x_j = j/N, j = 0..N-1.
  static GridField sample(std::size_t n, const std::function<double(double)>& f);
  static GridField constant(std::size_t n, double c);

  std::size_t size() const noexcept { return values.size(); }
  double x(std::size_t j) const noexcept { return static_cast<double>(j) * spacing; }
  double& operator[](std::size_t j) { return values[j]; }
  double operator[](std::size_t j) const { return values[j]; }
  std::span<const double> view() const noexcept { return values; }

  double mean() const;
  double min() const;
  double max() const;
  bool all_finite() const;
};

bool is_power_of_two(std::size_t n) noexcept;

/// Throws ConfigInvalid unless the field lives on a power-of-two torus grid
/// with at least 16 nodes and finite values.
void require_torus_grid(const GridField& f, const char* who);

/// Discrete L2 distance on the unit torus: sqrt(mean((a-b)^2)).
double l2_distance(std::span<const double> a, std::span<const double> b);

}  // namespace crystalflow

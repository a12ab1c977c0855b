#include "crystalflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "crystalflow/errors.hpp"

namespace crystalflow {

GridField GridField::on_torus(std::vector<double> v) {
  const double h = v.empty() ? 1.0 : 1.0 / static_cast<double>(v.size());
  return GridField(std::move(v), h);
}

GridField GridField::sample(std::size_t n, const std::function<double(double)>& f) {
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = f(static_cast<double>(j) / static_cast<double>(n));
  return on_torus(std::move(v));
}

GridField GridField::constant(std::size_t n, double c) {
  return on_torus(std::vector<double>(n, c));
}

double GridField::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double GridField::min() const { return *std::min_element(values.begin(), values.end()); }
double GridField::max() const { return *std::max_element(values.begin(), values.end()); }

bool GridField::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

void require_torus_grid(const GridField& f, const char* who) {
  const auto n = f.size();
  if (n < 16 || !is_power_of_two(n))
    throw ConfigInvalid(std::string(who) + ": grid size must be a power of two >= 16, got " +
                        std::to_string(n));
  if (std::abs(f.spacing * static_cast<double>(n) - 1.0) > 1e-12)
    throw ConfigInvalid(std::string(who) + ": grid spacing must equal 1/N");
  if (!f.all_finite()) throw ConfigInvalid(std::string(who) + ": non-finite field values");
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw GridMismatch("l2_distance: size mismatch");
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

}  // namespace crystalflow

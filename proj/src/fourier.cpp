#include "crystalflow/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "crystalflow/errors.hpp"

namespace crystalflow::fourier {
namespace {

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  ~PlanPair() {
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::size_t, std::unique_ptr<PlanPair>>& cache() {
  static std::map<std::size_t, std::unique_ptr<PlanPair>> c;
  return c;
}

const PlanPair& plans_for(std::size_t n) {
  std::lock_guard lock(cache_mutex());
  auto& c = cache();
  if (auto it = c.find(n); it != c.end()) return *it->second;
  auto p = std::make_unique<PlanPair>();
  std::vector<double> re(n);
  std::vector<fftw_complex> cx(n / 2 + 1);
  const int ni = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p->r2c = fftw_plan_dft_r2c_1d(ni, re.data(), cx.data(), flags);
  p->c2r = fftw_plan_dft_c2r_1d(ni, cx.data(), re.data(), flags);
  if (!p->r2c || !p->c2r) throw Error("fourier: FFTW planning failed for n=" + std::to_string(n));
  return *c.emplace(n, std::move(p)).first->second;
}

void check_length(std::size_t n) {
  if (n < 2 || n % 2 != 0) throw ConfigInvalid("fourier: length must be even and >= 2");
}

}  // namespace

std::vector<Complex> forward(std::span<const double> f) {
  const std::size_t n = f.size();
  check_length(n);
  std::vector<Complex> out(n / 2 + 1);
  // Constant input: return the exact spectrum so constants stay exact
  // fixed points of every spectral operator.
  if (std::all_of(f.begin(), f.end(), [&](double v) { return v == f[0]; })) {
    out[0] = f[0];
    return out;
  }
  const auto& p = plans_for(n);
  std::vector<double> in(f.begin(), f.end());
  fftw_execute_dft_r2c(p.r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& c : out) c *= scale;
  return out;
}

std::vector<double> inverse(std::span<const Complex> half, std::size_t n) {
  check_length(n);
  if (half.size() != n / 2 + 1) throw GridMismatch("fourier::inverse: spectrum length mismatch");
  const auto& p = plans_for(n);
  // c2r overwrites its input.
  std::vector<Complex> in(half.begin(), half.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  return out;
}

std::vector<double> apply_symbol(std::span<const double> f,
                                 const std::function<double(double)>& symbol,
                                 bool keep_nyquist) {
  const std::size_t n = f.size();
  auto c = forward(f);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= symbol(two_pi * static_cast<double>(k));
  if (!keep_nyquist) c.back() = 0.0;
  return inverse(c, n);
}

std::vector<double> derivative(std::span<const double> f, int order) {
  if (order < 0) throw ConfigInvalid("fourier::derivative: negative order");
  const std::size_t n = f.size();
  auto c = forward(f);
  const double two_pi = 2.0 * std::numbers::pi;
  // (i w)^order
  Complex unit = 1.0;
  for (int i = 0; i < order % 4; ++i) unit *= Complex(0.0, 1.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double w = two_pi * static_cast<double>(k);
    c[k] *= unit * std::pow(w, order);
  }
  if (order % 2 == 1) c.back() = 0.0;
  return inverse(c, n);
}

std::vector<double> laplacian(std::span<const double> f) { return derivative(f, 2); }

void clear_plan_cache() {
  std::lock_guard lock(cache_mutex());
  cache().clear();
}

}  // namespace crystalflow::fourier
